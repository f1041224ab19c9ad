#include "uvnet/network.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <queue>

#include "uvnet/sampling.hpp"

namespace uvnet {

namespace {

std::string node_str(NodeId i) { return std::to_string(i); }

IndexList range(std::size_t begin, std::size_t end) {
  IndexList out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

void check_nodes(const Dag& g, const NodeSet& s) {
  for (NodeId i : s)
    if (!g.has(i)) throw Error("unknown node " + node_str(i));
}

// Conjunction of the factors of `nodes`, with blocks laid out in that order.
// Each node's parents must already appear in `nodes`.
Region conjunction(const UncertaintyNetwork& n, const NodeList& nodes) {
  std::map<NodeId, std::size_t> offset;
  std::size_t dim = 0;
  for (NodeId i : nodes) {
    offset[i] = dim;
    dim += n.variable(i).dim;
  }
  Region out = Region::full(dim);
  for (NodeId i : nodes) {
    IndexList targets;
    auto add_block = [&](NodeId k) {
      const auto it = offset.find(k);
      if (it == offset.end()) throw Error("parent " + node_str(k) + " missing from the node list");
      for (std::size_t c = 0; c < n.variable(k).dim; ++c) targets.push_back(it->second + c);
    };
    for (NodeId p : n.dag().parents(i)) add_block(p);
    add_block(i);
    out = intersect(out, embed(n.factor(i), dim, targets));
  }
  return out;
}

// Nonemptiness of factor i on the reachable parent set, exact where the
// representations allow it.
Verdict check_definite(const UncertaintyNetwork& n, NodeId i) {
  const Dag& g = n.dag();
  const NodeList& pa = g.parents(i);
  const NodeSet closure = ancestral_closure(g, NodeSet(pa.begin(), pa.end()));
  NodeList order;
  for (NodeId k : canonical_order(g))
    if (closure.count(k)) order.push_back(k);

  const Region anc = conjunction(n, order);
  std::map<NodeId, std::size_t> offset;
  std::size_t off = 0;
  for (NodeId k : order) {
    offset[k] = off;
    off += n.variable(k).dim;
  }
  IndexList pa_coords;
  for (NodeId p : pa)
    for (std::size_t c = 0; c < n.variable(p).dim; ++c) pa_coords.push_back(offset[p] + c);

  const Region& f = n.factor(i);
  const std::size_t pd = pa_coords.size();
  try {
    const Region reach = project(anc, pa_coords);
    return is_subset(reach, project(f, range(0, pd)));
  } catch (const UnsupportedRepresentation&) {
  }
  const ConditionalMap m = n.conditional(i);
  bool all = true;
  for (const Vector& z : sample_points(anc, {0, 200})) {
    Vector x(static_cast<Eigen::Index>(pd));
    for (std::size_t k = 0; k < pd; ++k) x(static_cast<Eigen::Index>(k)) = z(static_cast<Eigen::Index>(pa_coords[k]));
    if (holds(is_empty(evaluate_map(m, x)))) {
      all = false;
      break;
    }
  }
  return all ? Verdict::SampledTrue : Verdict::False;
}

void check_query(const Dag& g, const DSepQuery& q) {
  check_nodes(g, q.a);
  check_nodes(g, q.b);
  check_nodes(g, q.c);
  if (q.a.empty() || q.b.empty()) throw Error("d-separation query needs nonempty A and B");
  for (NodeId i : q.a)
    if (q.b.count(i) || q.c.count(i)) throw Error("d-separation query sets must be disjoint");
  for (NodeId i : q.b)
    if (q.c.count(i)) throw Error("d-separation query sets must be disjoint");
}

}  // namespace

// Dag -------------------------------------------------------------------------

Dag::Dag(NodeList nodes, std::vector<Edge> edges) : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (NodeId i : nodes_) {
    if (!parents_.emplace(i, NodeList{}).second) throw Error("duplicate node " + node_str(i));
    children_.emplace(i, NodeList{});
  }
  std::set<Edge> seen;
  for (const auto& [p, c] : edges_) {
    if (!has(p) || !has(c)) throw Error("edge " + node_str(p) + " -> " + node_str(c) + " uses an unknown node");
    if (p == c) throw Error("self-loop at node " + node_str(p));
    if (!seen.insert({p, c}).second) throw Error("duplicate edge " + node_str(p) + " -> " + node_str(c));
    parents_[c].push_back(p);
    children_[p].push_back(c);
  }
  for (auto& [i, list] : parents_) std::sort(list.begin(), list.end());
  for (auto& [i, list] : children_) std::sort(list.begin(), list.end());
  canonical_order(*this);
}

const NodeList& Dag::parents(NodeId i) const {
  const auto it = parents_.find(i);
  if (it == parents_.end()) throw Error("unknown node " + node_str(i));
  return it->second;
}

const NodeList& Dag::children(NodeId i) const {
  const auto it = children_.find(i);
  if (it == children_.end()) throw Error("unknown node " + node_str(i));
  return it->second;
}

Dag Dag::induced(const NodeSet& keep) const {
  NodeList nodes;
  for (NodeId i : nodes_)
    if (keep.count(i)) nodes.push_back(i);
  std::vector<Edge> edges;
  for (const auto& e : edges_)
    if (keep.count(e.first) && keep.count(e.second)) edges.push_back(e);
  return Dag(std::move(nodes), std::move(edges));
}

NodeList canonical_order(const Dag& g) {
  std::map<NodeId, std::size_t> indegree;
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId i : g.nodes()) {
    indegree[i] = g.parents(i).size();
    if (indegree[i] == 0) ready.push(i);
  }
  NodeList order;
  while (!ready.empty()) {
    const NodeId i = ready.top();
    ready.pop();
    order.push_back(i);
    for (NodeId c : g.children(i))
      if (--indegree[c] == 0) ready.push(c);
  }
  if (order.size() != g.nodes().size()) throw Error("graph has a cycle");
  return order;
}

bool is_topological(const Dag& g, const NodeList& order) {
  if (order.size() != g.nodes().size()) return false;
  std::map<NodeId, std::size_t> pos;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!g.has(order[k]) || !pos.emplace(order[k], k).second) return false;
  }
  return std::all_of(g.edges().begin(), g.edges().end(),
                     [&](const Edge& e) { return pos[e.first] < pos[e.second]; });
}

Relatives relatives(const Dag& g, NodeId i) {
  if (!g.has(i)) throw Error("unknown node " + node_str(i));
  Relatives r;
  r.parents = NodeSet(g.parents(i).begin(), g.parents(i).end());
  std::deque<NodeId> todo(g.children(i).begin(), g.children(i).end());
  while (!todo.empty()) {
    const NodeId k = todo.front();
    todo.pop_front();
    if (!r.descendants.insert(k).second) continue;
    for (NodeId c : g.children(k)) todo.push_back(c);
  }
  for (NodeId k : g.nodes())
    if (k != i && !r.descendants.count(k)) r.non_descendants.insert(k);
  r.ancestors = ancestral_closure(g, r.parents);
  return r;
}

NodeSet ancestral_closure(const Dag& g, const NodeSet& a) {
  check_nodes(g, a);
  NodeSet out;
  std::deque<NodeId> todo(a.begin(), a.end());
  while (!todo.empty()) {
    const NodeId k = todo.front();
    todo.pop_front();
    if (!out.insert(k).second) continue;
    for (NodeId p : g.parents(k)) todo.push_back(p);
  }
  return out;
}

bool d_separated(const Dag& g, const DSepQuery& q) {
  check_query(g, q);
  const NodeSet anc = ancestral_closure(g, q.c);
  // Travel direction: up means the ball arrived from a child.
  std::set<std::pair<NodeId, bool>> visited;
  std::deque<std::pair<NodeId, bool>> todo;
  for (NodeId i : q.a) todo.emplace_back(i, true);
  while (!todo.empty()) {
    const auto [y, up] = todo.front();
    todo.pop_front();
    if (!visited.insert({y, up}).second) continue;
    const bool observed = q.c.count(y) != 0;
    if (!observed && q.b.count(y)) return false;
    if (up && !observed) {
      for (NodeId p : g.parents(y)) todo.emplace_back(p, true);
      for (NodeId c : g.children(y)) todo.emplace_back(c, false);
    } else if (!up) {
      if (!observed)
        for (NodeId c : g.children(y)) todo.emplace_back(c, false);
      if (anc.count(y))
        for (NodeId p : g.parents(y)) todo.emplace_back(p, true);
    }
  }
  return true;
}

// UncertaintyNetwork ----------------------------------------------------------

UncertaintyNetwork::UncertaintyNetwork(Dag dag, std::map<NodeId, VariableSignature> variables,
                                       std::map<NodeId, Region> factors, DefinitenessPolicy policy)
    : dag_(std::move(dag)), variables_(std::move(variables)), factors_(std::move(factors)) {
  std::set<std::string> names;
  for (NodeId i : dag_.nodes()) {
    const auto v = variables_.find(i);
    if (v == variables_.end()) throw Error("node " + node_str(i) + " has no variable");
    if (v->second.dim == 0) throw Error("node " + node_str(i) + " has zero dimension");
    if (!names.insert(v->second.name).second) throw Error("duplicate variable name '" + v->second.name + "'");
    const auto f = factors_.find(i);
    if (f == factors_.end()) throw Error("node " + node_str(i) + " has no factor");
    std::size_t expected = v->second.dim;
    for (NodeId p : dag_.parents(i)) expected += variable(p).dim;
    if (f->second.dim() != expected) {
      throw DimensionMismatch("factor of node " + node_str(i) + " has dimension " + std::to_string(f->second.dim()) +
                              ", expected " + std::to_string(expected));
    }
  }
  if (variables_.size() != dag_.nodes().size() || factors_.size() != dag_.nodes().size()) {
    throw Error("variables and factors must be given for exactly the nodes of the graph");
  }
  if (policy == DefinitenessPolicy::Skip) return;
  for (NodeId i : canonical_order(dag_)) {
    if (dag_.is_root(i)) continue;
    const Verdict v = check_definite(*this, i);
    if (v == Verdict::False && policy == DefinitenessPolicy::Reject) {
      throw Error("factor of node " + node_str(i) + " is empty for some reachable parent value");
    }
    definiteness_[i] = v;
  }
}

const VariableSignature& UncertaintyNetwork::variable(NodeId i) const {
  const auto it = variables_.find(i);
  if (it == variables_.end()) throw Error("unknown node " + node_str(i));
  return it->second;
}

const Region& UncertaintyNetwork::factor(NodeId i) const {
  const auto it = factors_.find(i);
  if (it == factors_.end()) throw Error("unknown node " + node_str(i));
  return it->second;
}

ConditionalMap UncertaintyNetwork::conditional(NodeId i) const {
  std::vector<VariableSignature> given;
  for (NodeId p : dag_.parents(i)) given.push_back(variable(p));
  return ConditionalMap(std::move(given), variable(i), factor(i));
}

std::size_t UncertaintyNetwork::dim() const {
  std::size_t d = 0;
  for (const auto& [i, v] : variables_) d += v.dim;
  return d;
}

Names UncertaintyNetwork::names(const NodeList& nodes) const {
  Names out;
  for (NodeId i : nodes) out.push_back(variable(i).name);
  return out;
}

NodeId UncertaintyNetwork::node_named(const std::string& name) const {
  for (const auto& [i, v] : variables_)
    if (v.name == name) return i;
  throw Error("unknown variable '" + name + "'");
}

NodeList UncertaintyNetwork::in_order(const NodeSet& s) const {
  check_nodes(dag_, s);
  NodeList out;
  for (NodeId i : dag_.nodes())
    if (s.count(i)) out.push_back(i);
  return out;
}

// Operations ------------------------------------------------------------------

JointVariable joint(const UncertaintyNetwork& n) { return joint(n, canonical_order(n.dag())); }

JointVariable joint(const UncertaintyNetwork& n, const NodeList& order) {
  if (!is_topological(n.dag(), order)) throw Error("joint: order is not a topological order of the graph");
  std::vector<VariableSignature> sigs;
  Region acc = Region::full(0);
  std::map<NodeId, std::size_t> offset;
  std::size_t dim = 0;
  for (NodeId i : order) {
    const std::size_t d = n.variable(i).dim;
    offset[i] = dim;
    IndexList targets;
    for (NodeId p : n.dag().parents(i))
      for (std::size_t c = 0; c < n.variable(p).dim; ++c) targets.push_back(offset[p] + c);
    for (std::size_t c = 0; c < d; ++c) targets.push_back(dim + c);
    dim += d;
    acc = intersect(product(acc, Region::full(d)), embed(n.factor(i), dim, targets));
    sigs.push_back(n.variable(i));
  }
  return JointVariable(std::move(sigs), acc).reordered(n.names(n.dag().nodes()));
}

UncertaintyNetwork eliminate_leaf(const UncertaintyNetwork& n, NodeId j) {
  if (!n.dag().has(j)) throw Error("unknown node " + node_str(j));
  if (!n.dag().is_leaf(j)) throw Error("node " + node_str(j) + " is not a leaf");
  NodeSet keep(n.dag().nodes().begin(), n.dag().nodes().end());
  keep.erase(j);
  UncertaintyNetwork out;
  out.dag_ = n.dag().induced(keep);
  out.variables_ = n.variables_;
  out.variables_.erase(j);
  out.factors_ = n.factors_;
  out.factors_.erase(j);
  out.definiteness_ = n.definiteness_;
  out.definiteness_.erase(j);
  return out;
}

Region marginal_ancestral(const UncertaintyNetwork& n, const NodeSet& a) {
  if (ancestral_closure(n.dag(), a) != a) throw Error("marginal_ancestral: node set is not ancestral");
  UncertaintyNetwork cur = n;
  while (cur.dag().nodes().size() > a.size()) {
    NodeId leaf = 0;
    bool found = false;
    for (NodeId i : cur.dag().nodes()) {
      if (!a.count(i) && cur.dag().is_leaf(i)) {
        leaf = i;
        found = true;
        break;
      }
    }
    if (!found) throw Error("marginal_ancestral: no removable leaf");
    cur = eliminate_leaf(cur, leaf);
  }
  if (a.empty()) return Region::full(0);
  return joint(cur).uncertainty();
}

Region network_posterior(const UncertaintyNetwork& n, const NodeEvidence& evidence, const NodeSet& query) {
  check_nodes(n.dag(), query);
  Evidence named;
  for (const auto& [i, y] : evidence) {
    if (!n.dag().has(i)) throw Error("unknown node " + node_str(i));
    if (query.count(i)) throw Error("node " + node_str(i) + " is both observed and queried");
    named[n.variable(i).name] = y;
  }
  const JointVariable conditioned = condition_joint(joint(n), named);
  return marginal(conditioned, n.names(n.in_order(query)));
}

std::map<NodeId, Verdict> verify_local_independence(const UncertaintyNetwork& n, SampleOptions z_opts) {
  return verify_local_independence(n, joint(n), z_opts);
}

std::map<NodeId, Verdict> verify_local_independence(const UncertaintyNetwork& n, const JointVariable& j,
                                                    SampleOptions z_opts) {
  std::map<NodeId, Verdict> out;
  for (NodeId i : n.dag().nodes()) {
    const Relatives r = relatives(n.dag(), i);
    NodeSet b;
    for (NodeId k : r.non_descendants)
      if (!r.parents.count(k)) b.insert(k);
    if (b.empty()) {
      out[i] = Verdict::True;
      continue;
    }
    out[i] = check_conditional_independence(j, {n.variable(i).name}, n.names(n.in_order(b)),
                                            n.names(n.in_order(r.parents)), z_opts);
  }
  return out;
}

std::optional<Verdict> verify_global_independence(const UncertaintyNetwork& n, const DSepQuery& q,
                                                  SampleOptions z_opts) {
  if (!d_separated(n.dag(), q)) return std::nullopt;
  return verify_global_independence(n, joint(n), q, z_opts);
}

std::optional<Verdict> verify_global_independence(const UncertaintyNetwork& n, const JointVariable& j,
                                                  const DSepQuery& q, SampleOptions z_opts) {
  if (!d_separated(n.dag(), q)) return std::nullopt;
  return check_conditional_independence(j, n.names(n.in_order(q.a)), n.names(n.in_order(q.b)),
                                        n.names(n.in_order(q.c)), z_opts);
}

}  // namespace uvnet
