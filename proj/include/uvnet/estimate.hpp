#pragma once

#include <functional>
#include <map>
#include <string>

#include "uvnet/network.hpp"

namespace uvnet {

enum class EstimateStatus { Optimal, InfeasibleEvidence, Unbounded, BackendUnsupported };

std::string to_string(EstimateStatus s);

struct EstimateResult {
  EstimateStatus status = EstimateStatus::BackendUnsupported;
  std::map<NodeId, Vector> x_hat;  // query nodes
  std::map<NodeId, double> beta;   // every node
  double objective = 0.0;
  bool unique = true;
  std::string message;
};

struct LpEstimateOptions {
  /// Center p_i of node i's factor, over (parents ascending, i). The factor
  /// A z <= b is rewritten as A (z - p_i) <= h_i with h_i = b - A p_i, which
  /// must be strictly positive. Nodes without an entry use the origin when
  /// b > 0 and the Chebyshev center otherwise.
  std::map<NodeId, Vector> centers;
  bool check_uniqueness = true;
};

/// Minimizes the sum of scaling variables beta_i subject to
/// A_i (z_i - p_i) <= beta_i h_i, beta_i >= 0, with observed nodes fixed to
/// their evidence. Factors without constraints get beta_i = 0.
EstimateResult point_estimate_lp(const UncertaintyNetwork& n, const NodeEvidence& evidence,
                                 const LpEstimateOptions& opts = {});

/// Posterior set over the unobserved nodes (declaration order).
Region posterior_set(const UncertaintyNetwork& n, const NodeEvidence& evidence);

/// Text block: status, objective, one x line per query node, one beta line
/// per node.
std::string format_estimate(const EstimateResult& r);

// Gaussian factors --------------------------------------------------------------

/// x_i ~ N(F x_pa(i) + c, sigma). An improper factor carries no information.
struct GaussianFactor {
  Matrix f;
  Vector c;
  Matrix sigma;
  bool improper = false;

  static GaussianFactor proper(Matrix f, Vector c, Matrix sigma);
  static GaussianFactor flat(std::size_t dim, std::size_t parent_dim);
};

class GaussianNetwork {
 public:
  GaussianNetwork(Dag dag, std::map<NodeId, VariableSignature> variables, std::map<NodeId, GaussianFactor> factors);

  const Dag& dag() const { return dag_; }
  const VariableSignature& variable(NodeId i) const { return variables_.at(i); }
  const GaussianFactor& factor(NodeId i) const { return factors_.at(i); }

  /// Parent block dimension of node i.
  std::size_t parent_dim(NodeId i) const;

  /// Negative log density of node i's factor at (x_pa, x_i).
  double neg_log_density(NodeId i, const Vector& x_pa, const Vector& x_i) const;

 private:
  Dag dag_;
  std::map<NodeId, VariableSignature> variables_;
  std::map<NodeId, GaussianFactor> factors_;
};

/// MAP estimate of the unobserved nodes by whitened least squares. beta_i is
/// the factor's negative log density divided by eta, clamped at zero.
EstimateResult point_estimate_gaussian(const GaussianNetwork& n, const NodeEvidence& evidence, double eta = 1.0);

using GaussianSolver = std::function<EstimateResult(const GaussianNetwork&, const NodeEvidence&)>;

struct MapEquivalenceReport {
  double max_abs_diff = 0.0;
  bool pass = false;
};

/// Compares the solver against the conditional mean of the joint Gaussian
/// (covariance form, or information form when a factor is improper).
MapEquivalenceReport verify_map_equivalence(const GaussianNetwork& n, const NodeEvidence& evidence,
                                            const GaussianSolver& solver = {});

/// Conditional mean of the unobserved nodes, computed from the joint
/// distribution.
std::map<NodeId, Vector> gaussian_conditional_mean(const GaussianNetwork& n, const NodeEvidence& evidence);

}  // namespace uvnet
