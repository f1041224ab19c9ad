#include "uvnet/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "uvnet/sampling.hpp"

namespace uvnet {

namespace {

std::size_t total_dim(const std::vector<VariableSignature>& sigs) {
  std::size_t n = 0;
  for (const auto& s : sigs) n += s.dim;
  return n;
}

IndexList range(std::size_t begin, std::size_t end) {
  IndexList out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

FixedValues fix(const IndexList& coords, const Vector& values) {
  if (coords.size() != static_cast<std::size_t>(values.size())) {
    throw DimensionMismatch("value has length " + std::to_string(values.size()) + ", expected " +
                            std::to_string(coords.size()));
  }
  FixedValues out;
  for (std::size_t k = 0; k < coords.size(); ++k) out[coords[k]] = values(static_cast<Eigen::Index>(k));
  return out;
}

Names concat(const Names& a, const Names& b) {
  Names out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// a, b, c pairwise disjoint, known to j, and (when `cover`) exhausting j.
void check_partition(const JointVariable& j, const std::vector<const Names*>& parts, bool cover) {
  std::set<std::string> seen;
  for (const Names* part : parts) {
    for (const auto& name : *part) {
      if (!j.has(name)) throw Error("unknown variable '" + name + "'");
      if (!seen.insert(name).second) throw Error("variable '" + name + "' appears in more than one set");
    }
  }
  if (cover && seen.size() != j.signatures().size()) {
    throw Error("variable sets must cover every variable of the joint");
  }
}

Region product_of_marginals(const JointVariable& j, const std::vector<Names>& groups) {
  Region out = marginal(j, groups.front());
  for (std::size_t g = 1; g < groups.size(); ++g) out = product(out, marginal(j, groups[g]));
  return out;
}

// Regions equal the product of their two blocks' projections.
Verdict splits_as_product(const Region& r, std::size_t first_dim, const SampleOptions& opts) {
  const Region lhs = project(r, range(0, first_dim));
  const Region rhs = project(r, range(first_dim, r.dim()));
  return regions_equal(r, product(lhs, rhs), opts);
}

}  // namespace

UncertaintyVariable::UncertaintyVariable(VariableSignature sig, Region u)
    : signature(std::move(sig)), uncertainty(std::move(u)) {
  if (uncertainty.dim() != signature.dim) throw DimensionMismatch("uncertainty set dimension differs from signature");
}

ConditionalMap::ConditionalMap(std::vector<VariableSignature> given_vars, VariableSignature target_var, Region rel)
    : given(std::move(given_vars)), target(std::move(target_var)), relation(std::move(rel)) {
  if (relation.dim() != given_dim() + target.dim) {
    throw DimensionMismatch("relation dimension must equal given plus target dimensions");
  }
}

ConditionalMap::ConditionalMap(VariableSignature given_var, VariableSignature target_var, Region rel)
    : ConditionalMap(std::vector<VariableSignature>{std::move(given_var)}, std::move(target_var), std::move(rel)) {}

std::size_t ConditionalMap::given_dim() const { return total_dim(given); }

JointVariable::JointVariable(std::vector<VariableSignature> signatures, Region uncertainty)
    : signatures_(std::move(signatures)), uncertainty_(std::move(uncertainty)) {
  std::set<std::string> names;
  for (const auto& s : signatures_) {
    if (s.dim == 0) throw Error("variable '" + s.name + "' has zero dimension");
    if (!names.insert(s.name).second) throw Error("duplicate variable name '" + s.name + "'");
  }
  if (uncertainty_.dim() != total_dim(signatures_)) {
    throw DimensionMismatch("joint uncertainty dimension differs from the sum of block dimensions");
  }
}

Names JointVariable::names() const {
  Names out;
  for (const auto& s : signatures_) out.push_back(s.name);
  return out;
}

bool JointVariable::has(const std::string& name) const {
  return std::any_of(signatures_.begin(), signatures_.end(), [&](const auto& s) { return s.name == name; });
}

const VariableSignature& JointVariable::signature(const std::string& name) const {
  for (const auto& s : signatures_)
    if (s.name == name) return s;
  throw Error("unknown variable '" + name + "'");
}

std::size_t JointVariable::offset(const std::string& name) const {
  std::size_t off = 0;
  for (const auto& s : signatures_) {
    if (s.name == name) return off;
    off += s.dim;
  }
  throw Error("unknown variable '" + name + "'");
}

IndexList JointVariable::indices(const Names& names) const {
  IndexList out;
  for (const auto& name : names) {
    const std::size_t off = offset(name);
    for (std::size_t k = 0; k < signature(name).dim; ++k) out.push_back(off + k);
  }
  return out;
}

JointVariable JointVariable::reordered(const Names& order) const {
  if (order.size() != signatures_.size()) throw Error("reordered: order must list every variable");
  std::vector<VariableSignature> sigs;
  for (const auto& name : order) sigs.push_back(signature(name));
  return JointVariable(std::move(sigs), permute(uncertainty_, indices(order)));
}

// ---------------------------------------------------------------------------

Region evaluate_map(const ConditionalMap& m, const Vector& x) {
  return slice(m.relation, fix(range(0, m.given_dim()), x));
}

ValidityReport check_conditional_validity(const ConditionalMap& m, const Region& ux, const Region& uy,
                                          const SampleOptions& opts) {
  const std::size_t gd = m.given_dim();
  if (ux.dim() != gd || uy.dim() != m.target.dim) throw DimensionMismatch("check_conditional_validity: dimensions");
  const IndexList x_coords = range(0, gd);
  const IndexList y_coords = range(gd, gd + m.target.dim);
  ValidityReport report{};
  report.nonempty_on_support = is_subset(ux, project(m.relation, x_coords), opts);
  const Region restricted = intersect(m.relation, product(ux, Region::full(m.target.dim)));
  report.within_marginal = is_subset(project(restricted, y_coords), uy, opts);
  return report;
}

JointVariable otimes(const Region& ux, const ConditionalMap& m) {
  if (ux.dim() != m.given_dim()) throw DimensionMismatch("otimes: prior dimension differs from the map's input");
  std::vector<VariableSignature> sigs = m.given;
  sigs.push_back(m.target);
  return JointVariable(std::move(sigs), intersect(product(ux, Region::full(m.target.dim)), m.relation));
}

ConditionalMap derive_conditional(const JointVariable& j, const Names& given, const std::string& target) {
  Names order = given;
  order.push_back(target);
  const JointVariable r = j.reordered(order);
  std::vector<VariableSignature> given_sigs;
  for (const auto& g : given) given_sigs.push_back(j.signature(g));
  return ConditionalMap(std::move(given_sigs), j.signature(target), r.uncertainty());
}

Region information_map(const ConditionalMap& m, const Vector& y) {
  const std::size_t gd = m.given_dim();
  return slice(m.relation, fix(range(gd, gd + m.target.dim), y));
}

Region posterior(const Region& ux, const ConditionalMap& m, const Vector& y) {
  return intersect(ux, information_map(m, y));
}

Region marginal(const JointVariable& j, const Names& names) {
  if (names.empty()) throw Error("marginal: no variables named");
  return project(j.uncertainty(), j.indices(names));
}

JointVariable marginal_joint(const JointVariable& j, const Names& names) {
  std::vector<VariableSignature> sigs;
  for (const auto& n : names) sigs.push_back(j.signature(n));
  return JointVariable(std::move(sigs), marginal(j, names));
}

JointVariable condition_joint(const JointVariable& j, const Evidence& evidence) {
  FixedValues fixed;
  for (const auto& [name, value] : evidence) {
    const auto part = fix(j.indices({name}), value);
    fixed.insert(part.begin(), part.end());
  }
  std::vector<VariableSignature> rest;
  for (const auto& s : j.signatures())
    if (!evidence.count(s.name)) rest.push_back(s);
  if (rest.empty()) throw Error("condition: evidence covers every variable");
  return JointVariable(std::move(rest), slice(j.uncertainty(), fixed));
}

Region condition(const JointVariable& j, const Evidence& evidence) {
  return condition_joint(j, evidence).uncertainty();
}

Verdict bayes_swap_check(const Region& ux, const ConditionalMap& y_given_x, const Region& uy,
                         const ConditionalMap& x_given_y, const SampleOptions& opts) {
  const JointVariable forward = otimes(ux, y_given_x);
  const JointVariable backward = otimes(uy, x_given_y);
  const Names order = forward.names();
  std::set<std::string> a(order.begin(), order.end());
  const Names other = backward.names();
  if (a != std::set<std::string>(other.begin(), other.end())) {
    throw Error("bayes_swap_check: the two joints range over different variables");
  }
  return regions_equal(forward.uncertainty(), backward.reordered(order).uncertainty(), opts);
}

// ---------------------------------------------------------------------------

Verdict is_independent(const JointVariable& j, const Names& a, const Names& b, const SampleOptions& opts) {
  if (a.empty() || b.empty()) throw Error("is_independent: both sets must be nonempty");
  check_partition(j, {&a, &b}, true);
  const Region joint = permute(j.uncertainty(), j.indices(concat(a, b)));
  return regions_equal(joint, product_of_marginals(j, {a, b}), opts);
}

Verdict is_conditionally_independent(const JointVariable& j, const Names& a, const Names& b, const Names& c,
                                     const std::vector<Vector>& z_samples, const SampleOptions& opts) {
  check_partition(j, {&a, &b, &c}, true);
  if (c.empty()) return is_independent(j, a, b, opts);
  const JointVariable ordered = j.reordered(concat(concat(a, b), c));
  const Region c_marginal = marginal(j, c);
  const IndexList c_coords = ordered.indices(c);
  const std::size_t a_dim = ordered.indices(a).size();
  Verdict out = Verdict::SampledTrue;
  for (const Vector& z : z_samples) {
    if (!contains(c_marginal, z)) throw Error("conditioning value lies outside the marginal of the conditioning set");
    const Region given = slice(ordered.uncertainty(), fix(c_coords, z));
    out = out && splits_as_product(given, a_dim, opts);
    if (out == Verdict::False) break;
  }
  return out;
}

Verdict is_conditionally_independent(const JointVariable& j, const Names& a, const Names& b, const Names& c,
                                     SampleOptions z_opts) {
  check_partition(j, {&a, &b, &c}, true);
  if (c.empty()) return is_independent(j, a, b);
  const auto z = sample_points(marginal(j, c), z_opts);
  return is_conditionally_independent(j, a, b, c, z);
}

Verdict conditional_independence_exact(const JointVariable& j, const Names& a, const Names& b, const Names& c) {
  if (a.empty() || b.empty()) throw Error("conditional independence: both sets must be nonempty");
  check_partition(j, {&a, &b, &c}, false);
  if (!j.uncertainty().is_polytopic()) {
    throw UnsupportedRepresentation("exact conditional independence needs a polytopic joint");
  }
  const Names abc = concat(concat(a, b), c);
  const Region joint = marginal(j, abc);
  const JointVariable local = marginal_joint(j, abc);
  const std::size_t n = joint.dim();
  const Region ac = marginal(j, concat(a, c));
  const Region bc = marginal(j, concat(b, c));
  const Region factored = intersect(embed(ac, n, local.indices(concat(a, c))), embed(bc, n, local.indices(concat(b, c))));
  return is_subset(factored, joint);
}

Verdict check_conditional_independence(const JointVariable& j, const Names& a, const Names& b, const Names& c,
                                       SampleOptions z_opts) {
  if (j.uncertainty().is_polytopic()) return conditional_independence_exact(j, a, b, c);
  Names abc = concat(concat(a, b), c);
  const JointVariable local = abc.size() == j.signatures().size() ? j : marginal_joint(j, abc);
  return is_conditionally_independent(local, a, b, c, z_opts);
}

Verdict pairwise_independent(const JointVariable& j, const SampleOptions& opts) {
  const Names names = j.names();
  if (names.size() < 2) throw Error("pairwise_independent: need at least two variables");
  Verdict out = Verdict::True;
  for (std::size_t p = 0; p < names.size(); ++p) {
    for (std::size_t q = p + 1; q < names.size(); ++q) {
      const JointVariable pair = marginal_joint(j, {names[p], names[q]});
      out = out && is_independent(pair, {names[p]}, {names[q]}, opts);
      if (out == Verdict::False) return out;
    }
  }
  return out;
}

Verdict totally_independent(const JointVariable& j, const SampleOptions& opts) {
  const Names names = j.names();
  if (names.size() < 2) throw Error("totally_independent: need at least two variables");
  std::vector<Names> singles;
  for (const auto& n : names) singles.push_back({n});
  return regions_equal(j.uncertainty(), product_of_marginals(j, singles), opts);
}

}  // namespace uvnet
