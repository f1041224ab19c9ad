#pragma once

#include <map>
#include <string>
#include <vector>

#include "uvnet/region.hpp"

namespace uvnet {

/// Name and dimension of a variable's domain.
struct VariableSignature {
  std::string name;
  std::size_t dim = 1;

  bool operator==(const VariableSignature&) const = default;
};

/// A variable together with the region its realizations lie in.
struct UncertaintyVariable {
  VariableSignature signature;
  Region uncertainty;

  UncertaintyVariable(VariableSignature sig, Region u);
};

/// Set-valued map from the given variables to the target, stored as its
/// graph: a relation over (given blocks..., target).
struct ConditionalMap {
  std::vector<VariableSignature> given;
  VariableSignature target;
  Region relation;

  ConditionalMap(std::vector<VariableSignature> given_vars, VariableSignature target_var, Region rel);
  ConditionalMap(VariableSignature given_var, VariableSignature target_var, Region rel);

  std::size_t given_dim() const;
};

using Names = std::vector<std::string>;
using Evidence = std::map<std::string, Vector>;

/// Joint variable over named coordinate blocks, laid out in the order of
/// `signatures`.
class JointVariable {
 public:
  JointVariable(std::vector<VariableSignature> signatures, Region uncertainty);

  const std::vector<VariableSignature>& signatures() const { return signatures_; }
  const Region& uncertainty() const { return uncertainty_; }
  Names names() const;
  bool has(const std::string& name) const;
  const VariableSignature& signature(const std::string& name) const;

  /// Coordinates of the named blocks, block by block in the order given.
  IndexList indices(const Names& names) const;

  /// Same set with blocks laid out in `order` (a permutation of names()).
  JointVariable reordered(const Names& order) const;

 private:
  std::size_t offset(const std::string& name) const;

  std::vector<VariableSignature> signatures_;
  Region uncertainty_;
};

// Conditional maps -----------------------------------------------------------

/// The map's value at x: the relation sliced at the given coordinates.
Region evaluate_map(const ConditionalMap& m, const Vector& x);

struct ValidityReport {
  Verdict nonempty_on_support;  // P(x) is nonempty for every x in U_X
  Verdict within_marginal;      // P(x) lies in U_Y for every x in U_X
};

ValidityReport check_conditional_validity(const ConditionalMap& m, const Region& ux, const Region& uy,
                                          const SampleOptions& opts = {});

/// Joint of a prior over the given variables and a conditional map:
/// (U_X x D_Y) intersected with the relation.
JointVariable otimes(const Region& ux, const ConditionalMap& m);

/// Conditional map of `target` given `given`, read off a joint over exactly
/// those variables.
ConditionalMap derive_conditional(const JointVariable& j, const Names& given, const std::string& target);

/// Set of given-values consistent with observing y.
Region information_map(const ConditionalMap& m, const Vector& y);

/// Posterior over the given variables after observing y: U_X intersected
/// with the information map. Empty means the observation is impossible
/// under the model.
Region posterior(const Region& ux, const ConditionalMap& m, const Vector& y);

// Joint variables --------------------------------------------------------------

/// Projection onto the named blocks (in the order listed).
Region marginal(const JointVariable& j, const Names& names);
JointVariable marginal_joint(const JointVariable& j, const Names& names);

/// Slice at the evidence; the result covers the remaining blocks in
/// declaration order.
Region condition(const JointVariable& j, const Evidence& evidence);
JointVariable condition_joint(const JointVariable& j, const Evidence& evidence);

/// Equality of U_X (x) P_{Y|X} and U_Y (x) P_{X|Y} up to block order.
Verdict bayes_swap_check(const Region& ux, const ConditionalMap& y_given_x, const Region& uy,
                         const ConditionalMap& x_given_y, const SampleOptions& opts = {});

// Independence ------------------------------------------------------------------

/// U_{A,B} = U_A x U_B; a and b must partition the variables of j.
Verdict is_independent(const JointVariable& j, const Names& a, const Names& b, const SampleOptions& opts = {});

/// Checks P_{A,B|C}(z) = P_{A|C}(z) x P_{B|C}(z) at each supplied z. Every z
/// must lie in the C-marginal. A pass is reported as SampledTrue because only
/// finitely many z are examined.
Verdict is_conditionally_independent(const JointVariable& j, const Names& a, const Names& b, const Names& c,
                                     const std::vector<Vector>& z_samples, const SampleOptions& opts = {});

/// As above with z drawn from the C-marginal (hit-and-run for polytopic
/// marginals); `z_opts.count` defaults to 50 draws.
Verdict is_conditionally_independent(const JointVariable& j, const Names& a, const Names& b, const Names& c,
                                     SampleOptions z_opts = {0, 50});

/// Exact test for polytopic joints: A and B are independent given C iff
/// U_{A,B,C} = {(a,b,c) : (a,c) in U_{A,C}, (b,c) in U_{B,C}}. Variables not
/// in a, b or c are marginalized out first.
Verdict conditional_independence_exact(const JointVariable& j, const Names& a, const Names& b, const Names& c);

/// Exact when the joint is polytopic, z-sampled otherwise.
Verdict check_conditional_independence(const JointVariable& j, const Names& a, const Names& b, const Names& c,
                                       SampleOptions z_opts = {0, 50});

Verdict pairwise_independent(const JointVariable& j, const SampleOptions& opts = {});
Verdict totally_independent(const JointVariable& j, const SampleOptions& opts = {});

}  // namespace uvnet
