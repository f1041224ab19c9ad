#include "uvnet/estimate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "uvnet/io.hpp"
#include "uvnet/lp.hpp"

namespace uvnet {

namespace {

// Coordinates of the unobserved nodes, laid out in declaration order.
struct Layout {
  std::map<NodeId, std::size_t> offset;
  NodeList query;
  std::size_t dim = 0;
};

template <class Net>
Layout make_layout(const Net& n, const NodeEvidence& evidence) {
  for (const auto& [i, y] : evidence) {
    if (!n.dag().has(i)) throw Error("unknown node " + std::to_string(i));
    if (static_cast<std::size_t>(y.size()) != n.variable(i).dim) {
      throw DimensionMismatch("evidence for node " + std::to_string(i) + " has length " + std::to_string(y.size()) +
                              ", expected " + std::to_string(n.variable(i).dim));
    }
  }
  Layout l;
  for (NodeId i : n.dag().nodes()) {
    if (evidence.count(i)) continue;
    l.query.push_back(i);
    l.offset[i] = l.dim;
    l.dim += n.variable(i).dim;
  }
  return l;
}

// Splits a linear form over the factor coordinates (parents ascending, self)
// into query-coordinate coefficients and a constant from the evidence.
template <class Net>
void split_row(const Net& n, NodeId i, const Layout& l, const NodeEvidence& evidence, const Eigen::RowVectorXd& row,
               Eigen::RowVectorXd& coef, double& constant) {
  coef = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(l.dim));
  constant = 0.0;
  Eigen::Index k = 0;
  auto block = [&](NodeId node) {
    const std::size_t d = n.variable(node).dim;
    const auto ev = evidence.find(node);
    for (std::size_t c = 0; c < d; ++c, ++k) {
      if (ev != evidence.end()) {
        constant += row(k) * ev->second(static_cast<Eigen::Index>(c));
      } else {
        coef(static_cast<Eigen::Index>(l.offset.at(node) + c)) += row(k);
      }
    }
  };
  for (NodeId p : n.dag().parents(i)) block(p);
  block(i);
}

std::optional<HPolytope> as_polytope(const Region& r) {
  if (const auto* p = r.as<HPolytope>()) return *p;
  if (const auto* b = r.as<Box>()) return HPolytope::from_box(*b);
  if (r.is<FullSpace>()) return HPolytope(r.dim());
  return std::nullopt;
}

EstimateResult unsupported(std::string message) {
  EstimateResult r;
  r.status = EstimateStatus::BackendUnsupported;
  r.message = std::move(message);
  return r;
}

Matrix whitening(const Matrix& sigma) {
  const Eigen::LLT<Matrix> llt(sigma);
  return llt.matrixL().solve(Matrix::Identity(sigma.rows(), sigma.cols()));
}

}  // namespace

std::string to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::Optimal: return "optimal";
    case EstimateStatus::InfeasibleEvidence: return "infeasible-evidence";
    case EstimateStatus::Unbounded: return "unbounded";
    case EstimateStatus::BackendUnsupported: return "backend-unsupported";
  }
  return "unknown";
}

// LP backend ------------------------------------------------------------------

EstimateResult point_estimate_lp(const UncertaintyNetwork& n, const NodeEvidence& evidence,
                                 const LpEstimateOptions& opts) {
  const Layout l = make_layout(n, evidence);

  struct Scaled {
    NodeId node;
    HPolytope p;
    Vector h;
    Vector center;
  };
  std::vector<Scaled> scaled;
  for (NodeId i : n.dag().nodes()) {
    const Region& f = n.factor(i);
    const auto p = as_polytope(f);
    if (!p) return unsupported("factor of node " + std::to_string(i) + " is a " + f.kind() + ", not a polytope");
    if (p->rows() == 0) continue;
    Vector center;
    if (const auto it = opts.centers.find(i); it != opts.centers.end()) {
      center = it->second;
      if (static_cast<std::size_t>(center.size()) != p->dim()) {
        throw DimensionMismatch("center of node " + std::to_string(i) + " has the wrong length");
      }
    } else if (p->b().minCoeff() > kFeasTol) {
      center = Vector::Zero(static_cast<Eigen::Index>(p->dim()));
    } else {
      const auto ball = chebyshev_ball(*p);
      if (!ball || ball->radius <= kFeasTol) {
        return unsupported("factor of node " + std::to_string(i) + " has no interior point");
      }
      center = ball->center;
    }
    const Vector h = p->b() - p->a() * center;
    if (h.minCoeff() <= kFeasTol) {
      return unsupported("factor of node " + std::to_string(i) + " is not strictly positive about its center");
    }
    scaled.push_back({i, *p, h, center});
  }

  const std::size_t nx = l.dim;
  const std::size_t nv = nx + scaled.size();
  std::size_t rows = scaled.size();
  for (const auto& s : scaled) rows += s.p.rows();
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(nv));
  Vector b = Vector::Zero(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < scaled.size(); ++k) {
    const auto& s = scaled[k];
    const auto beta_col = static_cast<Eigen::Index>(nx + k);
    for (std::size_t row = 0; row < s.p.rows(); ++row, ++r) {
      const Eigen::RowVectorXd full_row = s.p.a().row(static_cast<Eigen::Index>(row));
      Eigen::RowVectorXd coef;
      double constant = 0.0;
      split_row(n, s.node, l, evidence, full_row, coef, constant);
      a.block(r, 0, 1, static_cast<Eigen::Index>(nx)) = coef;
      a(r, beta_col) = -s.h(static_cast<Eigen::Index>(row));
      b(r) = full_row.dot(s.center) - constant;
    }
    a(r, beta_col) = -1.0;
    ++r;
  }
  Vector c = Vector::Zero(static_cast<Eigen::Index>(nv));
  c.tail(static_cast<Eigen::Index>(scaled.size())).setOnes();
  const HPolytope program(a, b);
  const LpResult sol = solve_lp(c, program);

  EstimateResult out;
  if (sol.status == LpStatus::Infeasible) {
    out.status = EstimateStatus::InfeasibleEvidence;
    return out;
  }
  if (sol.status == LpStatus::Unbounded) {
    out.status = EstimateStatus::Unbounded;
    return out;
  }
  out.status = EstimateStatus::Optimal;
  out.objective = sol.value;
  for (NodeId i : n.dag().nodes()) out.beta[i] = 0.0;
  for (std::size_t k = 0; k < scaled.size(); ++k)
    out.beta[scaled[k].node] = std::max(0.0, sol.x(static_cast<Eigen::Index>(nx + k)));
  for (NodeId i : l.query) {
    out.x_hat[i] = sol.x.segment(static_cast<Eigen::Index>(l.offset.at(i)),
                                 static_cast<Eigen::Index>(n.variable(i).dim));
  }

  if (opts.check_uniqueness && nx > 0) {
    Matrix a2(a.rows() + 1, a.cols());
    a2 << a, c.transpose();
    Vector b2(b.size() + 1);
    b2 << b, sol.value + 1e-9 * std::max(1.0, std::abs(sol.value));
    const HPolytope optimal_face(a2, b2);
    for (std::size_t k = 0; k < nx && out.unique; ++k) {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(nv));
      e(static_cast<Eigen::Index>(k)) = 1.0;
      const LpResult lo = solve_lp(e, optimal_face);
      const LpResult hi = solve_lp(-e, optimal_face);
      if (lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal || -hi.value - lo.value > 1e-7) {
        out.unique = false;
      }
    }
  }
  return out;
}

Region posterior_set(const UncertaintyNetwork& n, const NodeEvidence& evidence) {
  NodeSet query;
  for (NodeId i : n.dag().nodes())
    if (!evidence.count(i)) query.insert(i);
  return network_posterior(n, evidence, query);
}

std::string format_estimate(const EstimateResult& r) {
  std::ostringstream os;
  os << "status " << to_string(r.status) << '\n';
  if (r.status != EstimateStatus::Optimal) {
    if (!r.message.empty()) os << "message " << r.message << '\n';
    return os.str();
  }
  os << "objective " << format_number(r.objective) << '\n';
  os << "unique " << (r.unique ? "yes" : "no") << '\n';
  for (const auto& [i, x] : r.x_hat) {
    os << "x " << i;
    for (Eigen::Index k = 0; k < x.size(); ++k) os << ' ' << format_number(x(k));
    os << '\n';
  }
  for (const auto& [i, b] : r.beta) os << "beta " << i << ' ' << format_number(b) << '\n';
  return os.str();
}

// Gaussian backend --------------------------------------------------------------

GaussianFactor GaussianFactor::proper(Matrix f, Vector c, Matrix sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != c.size() || f.rows() != c.size()) {
    throw DimensionMismatch("Gaussian factor: inconsistent dimensions");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
    throw Error("Gaussian factor: covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw Error("Gaussian factor: covariance is not positive definite");
  }
  return {std::move(f), std::move(c), std::move(sigma), false};
}

GaussianFactor GaussianFactor::flat(std::size_t dim, std::size_t parent_dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Matrix::Zero(d, static_cast<Eigen::Index>(parent_dim)), Vector::Zero(d), Matrix::Identity(d, d), true};
}

GaussianNetwork::GaussianNetwork(Dag dag, std::map<NodeId, VariableSignature> variables,
                                 std::map<NodeId, GaussianFactor> factors)
    : dag_(std::move(dag)), variables_(std::move(variables)), factors_(std::move(factors)) {
  for (NodeId i : dag_.nodes()) {
    if (!variables_.count(i) || !factors_.count(i)) throw Error("node " + std::to_string(i) + " lacks a factor");
    const auto& f = factors_.at(i);
    const auto d = static_cast<Eigen::Index>(variables_.at(i).dim);
    if (f.c.size() != d || f.f.rows() != d || f.f.cols() != static_cast<Eigen::Index>(parent_dim(i)) ||
        f.sigma.rows() != d || f.sigma.cols() != d) {
      throw DimensionMismatch("Gaussian factor of node " + std::to_string(i) + " has inconsistent dimensions");
    }
  }
  if (variables_.size() != dag_.nodes().size() || factors_.size() != dag_.nodes().size()) {
    throw Error("variables and factors must be given for exactly the nodes of the graph");
  }
}

std::size_t GaussianNetwork::parent_dim(NodeId i) const {
  std::size_t d = 0;
  for (NodeId p : dag_.parents(i)) d += variable(p).dim;
  return d;
}

double GaussianNetwork::neg_log_density(NodeId i, const Vector& x_pa, const Vector& x_i) const {
  const auto& f = factor(i);
  if (f.improper) return 0.0;
  const Vector r = whitening(f.sigma) * (x_i - f.f * x_pa - f.c);
  const double logdet = 2.0 * Eigen::LLT<Matrix>(f.sigma).matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * r.squaredNorm() + 0.5 * (static_cast<double>(x_i.size()) * std::log(2.0 * std::numbers::pi) + logdet);
}

EstimateResult point_estimate_gaussian(const GaussianNetwork& n, const NodeEvidence& evidence, double eta) {
  if (!(eta > 0)) throw Error("eta must be positive");
  const Layout l = make_layout(n, evidence);
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (NodeId i : n.dag().nodes()) {
    const auto& f = n.factor(i);
    if (f.improper) continue;
    const Matrix w = whitening(f.sigma);
    // Residual w (x_i - F x_pa - c) over (parents, self).
    const auto pd = static_cast<Eigen::Index>(n.parent_dim(i));
    const auto d = f.c.size();
    Matrix local(d, pd + d);
    local << -w * f.f, w;
    const Vector offset = w * f.c;
    for (Eigen::Index k = 0; k < d; ++k) {
      Eigen::RowVectorXd coef;
      double constant = 0.0;
      split_row(n, i, l, evidence, local.row(k), coef, constant);
      rows.push_back(coef);
      rhs.push_back(offset(k) - constant);
    }
  }
  EstimateResult out;
  const auto nz = static_cast<Eigen::Index>(l.dim);
  Vector z = Vector::Zero(nz);
  if (nz > 0) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), nz);
    Vector t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      m.row(static_cast<Eigen::Index>(k)) = rows[k];
      t(static_cast<Eigen::Index>(k)) = rhs[k];
    }
    const Matrix normal = m.transpose() * m;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(normal);
    if (rows.empty() || eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      out.status = EstimateStatus::Unbounded;
      out.message = "query is not identifiable from the factors";
      return out;
    }
    z = normal.ldlt().solve(m.transpose() * t);
  }
  out.status = EstimateStatus::Optimal;
  auto value = [&](NodeId i) -> Vector {
    if (const auto it = evidence.find(i); it != evidence.end()) return it->second;
    return z.segment(static_cast<Eigen::Index>(l.offset.at(i)), static_cast<Eigen::Index>(n.variable(i).dim));
  };
  for (NodeId i : l.query) out.x_hat[i] = value(i);
  for (NodeId i : n.dag().nodes()) {
    Vector x_pa(static_cast<Eigen::Index>(n.parent_dim(i)));
    Eigen::Index k = 0;
    for (NodeId p : n.dag().parents(i)) {
      const Vector v = value(p);
      x_pa.segment(k, v.size()) = v;
      k += v.size();
    }
    out.beta[i] = std::max(0.0, n.neg_log_density(i, x_pa, value(i)) / eta);
    out.objective += out.beta[i];
  }
  return out;
}

std::map<NodeId, Vector> gaussian_conditional_mean(const GaussianNetwork& n, const NodeEvidence& evidence) {
  const Layout l = make_layout(n, evidence);
  std::map<NodeId, Eigen::Index> offset;
  Eigen::Index dim = 0;
  for (NodeId i : n.dag().nodes()) {
    offset[i] = dim;
    dim += static_cast<Eigen::Index>(n.variable(i).dim);
  }
  // x = B x + c + e with e ~ N(0, S).
  Matrix b = Matrix::Zero(dim, dim);
  Vector c = Vector::Zero(dim);
  Matrix s = Matrix::Zero(dim, dim);
  Matrix s_inv = Matrix::Zero(dim, dim);
  bool improper = false;
  for (NodeId i : n.dag().nodes()) {
    const auto& f = n.factor(i);
    const Eigen::Index oi = offset[i];
    const auto d = f.c.size();
    Eigen::Index k = 0;
    for (NodeId p : n.dag().parents(i)) {
      const auto pd = static_cast<Eigen::Index>(n.variable(p).dim);
      b.block(oi, offset[p], d, pd) = f.f.middleCols(k, pd);
      k += pd;
    }
    c.segment(oi, d) = f.c;
    if (f.improper) {
      improper = true;
    } else {
      s.block(oi, oi, d, d) = f.sigma;
      s_inv.block(oi, oi, d, d) = f.sigma.inverse();
    }
  }
  std::vector<Eigen::Index> qi, ji;
  Vector y;
  {
    std::vector<double> yv;
    for (NodeId i : n.dag().nodes()) {
      const auto d = static_cast<Eigen::Index>(n.variable(i).dim);
      const auto ev = evidence.find(i);
      for (Eigen::Index k = 0; k < d; ++k) {
        if (ev == evidence.end()) {
          qi.push_back(offset[i] + k);
        } else {
          ji.push_back(offset[i] + k);
          yv.push_back(ev->second(k));
        }
      }
    }
    y = Eigen::Map<Vector>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  }
  const Matrix ib = Matrix::Identity(dim, dim) - b;
  Vector xq;
  if (!improper) {
    const Matrix a = ib.inverse();
    const Vector mu = a * c;
    const Matrix cov = a * s * a.transpose();
    const Vector mu_q = mu(qi);
    if (ji.empty()) {
      xq = mu_q;
    } else {
      const Matrix cov_jj = cov(ji, ji);
      xq = mu_q + cov(qi, ji) * cov_jj.llt().solve(y - mu(ji));
    }
  } else {
    const Matrix lambda = ib.transpose() * s_inv * ib;
    const Vector eta = ib.transpose() * s_inv * c;
    const Matrix l_qq = lambda(qi, qi);
    Vector rhs = eta(qi);
    if (!ji.empty()) rhs -= lambda(qi, ji) * y;
    xq = l_qq.ldlt().solve(rhs);
  }
  std::map<NodeId, Vector> out;
  Eigen::Index k = 0;
  for (NodeId i : l.query) {
    const auto d = static_cast<Eigen::Index>(n.variable(i).dim);
    out[i] = xq.segment(k, d);
    k += d;
  }
  return out;
}

MapEquivalenceReport verify_map_equivalence(const GaussianNetwork& n, const NodeEvidence& evidence,
                                            const GaussianSolver& solver) {
  const EstimateResult r = solver ? solver(n, evidence) : point_estimate_gaussian(n, evidence);
  MapEquivalenceReport out;
  if (r.status != EstimateStatus::Optimal) {
    out.max_abs_diff = INFINITY;
    return out;
  }
  for (const auto& [i, x] : gaussian_conditional_mean(n, evidence)) {
    const auto it = r.x_hat.find(i);
    if (it == r.x_hat.end() || it->second.size() != x.size()) {
      out.max_abs_diff = INFINITY;
      return out;
    }
    if (x.size() > 0) out.max_abs_diff = std::max(out.max_abs_diff, (it->second - x).cwiseAbs().maxCoeff());
  }
  out.pass = out.max_abs_diff <= 1e-6;
  return out;
}

}  // namespace uvnet
