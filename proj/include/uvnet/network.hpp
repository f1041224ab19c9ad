#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "uvnet/core.hpp"

namespace uvnet {

using NodeId = int;
using NodeSet = std::set<NodeId>;
using NodeList = std::vector<NodeId>;
using Edge = std::pair<NodeId, NodeId>;
using NodeEvidence = std::map<NodeId, Vector>;

class Dag {
 public:
  Dag() = default;
  Dag(NodeList nodes, std::vector<Edge> edges);

  const NodeList& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool has(NodeId i) const { return parents_.count(i) != 0; }

  /// Parents and children in ascending id order.
  const NodeList& parents(NodeId i) const;
  const NodeList& children(NodeId i) const;
  bool is_root(NodeId i) const { return parents(i).empty(); }
  bool is_leaf(NodeId i) const { return children(i).empty(); }

  /// Subgraph induced by `keep`, preserving declaration order.
  Dag induced(const NodeSet& keep) const;

 private:
  NodeList nodes_;
  std::vector<Edge> edges_;
  std::map<NodeId, NodeList> parents_;
  std::map<NodeId, NodeList> children_;
};

/// Topological order; among ready nodes the smallest id goes first.
NodeList canonical_order(const Dag& g);

/// True when every parent precedes its children in `order`, which must list
/// each node exactly once.
bool is_topological(const Dag& g, const NodeList& order);

struct Relatives {
  NodeSet parents;
  NodeSet descendants;
  NodeSet non_descendants;
  NodeSet ancestors;
};

Relatives relatives(const Dag& g, NodeId i);

/// `a` together with all of its ancestors.
NodeSet ancestral_closure(const Dag& g, const NodeSet& a);

struct DSepQuery {
  NodeSet a;
  NodeSet b;
  NodeSet c;
};

/// Reachability ("Bayes ball") test of whether c blocks every path between a
/// and b.
bool d_separated(const Dag& g, const DSepQuery& q);

/// What construction does when a factor is not always definite over its
/// parents' reachable set.
enum class DefinitenessPolicy { Reject, Record, Skip };

class UncertaintyNetwork {
 public:
  /// `factors[i]` is a region over (parents of i ascending, i).
  UncertaintyNetwork(Dag dag, std::map<NodeId, VariableSignature> variables, std::map<NodeId, Region> factors,
                     DefinitenessPolicy policy = DefinitenessPolicy::Reject);

  const Dag& dag() const { return dag_; }
  const VariableSignature& variable(NodeId i) const;
  const Region& factor(NodeId i) const;
  const std::map<NodeId, Region>& factors() const { return factors_; }

  /// Conditional map of i given its parents; roots give a map with no given
  /// variables.
  ConditionalMap conditional(NodeId i) const;

  /// Per non-root node: is the factor nonempty for every reachable parent
  /// value. Empty when checks were skipped.
  const std::map<NodeId, Verdict>& definiteness() const { return definiteness_; }

  std::size_t dim() const;
  Names names(const NodeList& nodes) const;
  NodeId node_named(const std::string& name) const;

  /// Nodes of `s` in declaration order.
  NodeList in_order(const NodeSet& s) const;

 private:
  Dag dag_;
  std::map<NodeId, VariableSignature> variables_;
  std::map<NodeId, Region> factors_;
  std::map<NodeId, Verdict> definiteness_;

  friend UncertaintyNetwork eliminate_leaf(const UncertaintyNetwork& n, NodeId j);
  UncertaintyNetwork() = default;
};

/// Conjunction of every factor, folded along `order` (a topological order;
/// canonical by default). Blocks follow the declaration order of the nodes.
JointVariable joint(const UncertaintyNetwork& n);
JointVariable joint(const UncertaintyNetwork& n, const NodeList& order);

/// Network on V \ {j} obtained by dropping the leaf j's factor.
UncertaintyNetwork eliminate_leaf(const UncertaintyNetwork& n, NodeId j);

/// Joint over an ancestral set, computed by eliminating leaves outside it.
/// Blocks follow declaration order.
Region marginal_ancestral(const UncertaintyNetwork& n, const NodeSet& a);

/// Joint conditioned on the evidence and projected onto the query (blocks in
/// declaration order).
Region network_posterior(const UncertaintyNetwork& n, const NodeEvidence& evidence, const NodeSet& query);

/// Per node i: X_i independent of X_{NonDes(i) \ pa(i)} given X_{pa(i)}.
std::map<NodeId, Verdict> verify_local_independence(const UncertaintyNetwork& n, SampleOptions z_opts = {0, 50});
std::map<NodeId, Verdict> verify_local_independence(const UncertaintyNetwork& n, const JointVariable& j,
                                                    SampleOptions z_opts = {0, 50});

/// Conditional independence for a d-separated query; nullopt when the query
/// is not d-separated.
std::optional<Verdict> verify_global_independence(const UncertaintyNetwork& n, const DSepQuery& q,
                                                  SampleOptions z_opts = {0, 50});
std::optional<Verdict> verify_global_independence(const UncertaintyNetwork& n, const JointVariable& j,
                                                  const DSepQuery& q, SampleOptions z_opts = {0, 50});

}  // namespace uvnet
