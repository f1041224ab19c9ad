#include "uvnet/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace uvnet {

namespace {

constexpr double kCostTol = 1e-10;
constexpr std::size_t kMaxPivots = 200000;

// Dense simplex tableau. Row `m` holds reduced costs; the last column holds
// the right-hand side (and -objective in row m).
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t cols) : t_(Matrix::Zero(m + 1, cols + 1)), basis_(m), m_(m), cols_(cols) {}

  double& at(std::size_t i, std::size_t j) { return t_(i, j); }
  double at(std::size_t i, std::size_t j) const { return t_(i, j); }
  double& rhs(std::size_t i) { return t_(i, cols_); }
  std::size_t& basis(std::size_t i) { return basis_[i]; }
  std::size_t basis(std::size_t i) const { return basis_[i]; }

  void pivot(std::size_t r, std::size_t c) {
    t_.row(r) /= t_(r, c);
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  void set_costs(const Vector& cost, const std::vector<bool>& active) {
    for (std::size_t j = 0; j <= cols_; ++j) t_(m_, j) = j < cols_ ? cost(j) : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active[i]) continue;
      const double cb = cost(basis_[i]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable
  // among ratio ties. Returns false when unbounded.
  enum class Outcome { Optimal, Unbounded };
  Outcome run(const std::vector<bool>& allowed, const std::vector<bool>& active) {
    for (std::size_t iter = 0; iter < kMaxPivots; ++iter) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (allowed[j] && t_(m_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return Outcome::Optimal;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (!active[i] || t_(i, enter) <= kPivotTol) continue;
        const double ratio = t_(i, cols_) / t_(i, enter);
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return Outcome::Unbounded;
      pivot(leave, enter);
    }
    throw Error("simplex: pivot limit exceeded");
  }

 private:
  Matrix t_;
  std::vector<std::size_t> basis_;
  std::size_t m_;
  std::size_t cols_;
};

}  // namespace

LpResult solve_lp(const LpProblem& p) { return solve_lp(p.objective, p.constraints); }

LpResult solve_lp(const Vector& c, const HPolytope& poly) {
  const std::size_t n = poly.dim();
  if (static_cast<std::size_t>(c.size()) != n) {
    throw DimensionMismatch("solve_lp: objective length differs from constraint dimension");
  }

  // Scale rows to unit infinity norm and discard rows with no coefficients.
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < poly.rows(); ++i) {
    const double s = poly.a().row(i).cwiseAbs().maxCoeff();
    if (s < 1e-14) {
      if (poly.b()(i) < -kFeasTol) return {LpStatus::Infeasible, {}, 0.0};
      continue;
    }
    rows.emplace_back(poly.a().row(i) / s);
    rhs.push_back(poly.b()(i) / s);
  }
  const std::size_t m = rows.size();

  if (m == 0) {
    if (c.cwiseAbs().maxCoeff() > 0.0) return {LpStatus::Unbounded, {}, -std::numeric_limits<double>::infinity()};
    return {LpStatus::Optimal, Vector::Zero(n), 0.0};
  }

  std::size_t artificial = 0;
  for (double v : rhs) artificial += v < 0.0 ? 1 : 0;

  // Columns: u (n), v (n), slacks (m), artificials.
  const std::size_t slack0 = 2 * n;
  const std::size_t art0 = slack0 + m;
  const std::size_t cols = art0 + artificial;
  Tableau tab(m, cols);
  std::size_t next_art = art0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      tab.at(i, j) = sign * rows[i](j);
      tab.at(i, n + j) = -sign * rows[i](j);
    }
    tab.at(i, slack0 + i) = sign;
    tab.rhs(i) = sign * rhs[i];
    if (sign < 0.0) {
      tab.at(i, next_art) = 1.0;
      tab.basis(i) = next_art++;
    } else {
      tab.basis(i) = slack0 + i;
    }
  }

  std::vector<bool> active(m, true);

  if (artificial > 0) {
    Vector cost = Vector::Zero(cols);
    cost.tail(artificial).setOnes();
    tab.set_costs(cost, active);
    std::vector<bool> allowed(cols, true);
    tab.run(allowed, active);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis(i) >= art0) infeas += std::max(0.0, tab.rhs(i));
    }
    if (infeas > kFeasTol) return {LpStatus::Infeasible, {}, 0.0};

    // Drive remaining artificials out of the basis; rows that cannot pivot
    // are linearly dependent and dropped.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis(i) < art0) continue;
      std::size_t col = art0;
      double best = kPivotTol;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(tab.at(i, j)) > best) {
          best = std::abs(tab.at(i, j));
          col = j;
        }
      }
      if (col < art0) {
        tab.pivot(i, col);
      } else {
        active[i] = false;
      }
    }
  }

  Vector cost = Vector::Zero(cols);
  cost.head(n) = c;
  cost.segment(n, n) = -c;
  tab.set_costs(cost, active);
  std::vector<bool> allowed(cols, false);
  for (std::size_t j = 0; j < art0; ++j) allowed[j] = true;
  if (tab.run(allowed, active) == Tableau::Outcome::Unbounded) {
    return {LpStatus::Unbounded, {}, -std::numeric_limits<double>::infinity()};
  }

  Vector x = Vector::Zero(n);
  for (std::size_t i = 0; i < m; ++i) {
    if (!active[i]) continue;
    const std::size_t b = tab.basis(i);
    if (b < n) x(b) += tab.rhs(i);
    else if (b < 2 * n) x(b - n) -= tab.rhs(i);
  }
  return {LpStatus::Optimal, x, c.dot(x)};
}

std::optional<ChebyshevBall> chebyshev_ball(const HPolytope& p, double cap) {
  const std::size_t n = p.dim();
  Matrix a = Matrix::Zero(p.rows() + 2, n + 1);
  Vector b = Vector::Zero(p.rows() + 2);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    a.row(i).head(n) = p.a().row(i);
    a(i, n) = p.a().row(i).norm();
    b(i) = p.b()(i);
  }
  a(p.rows(), n) = 1.0;
  b(p.rows()) = cap;
  a(p.rows() + 1, n) = -1.0;
  Vector c = Vector::Zero(n + 1);
  c(n) = -1.0;
  const LpResult r = solve_lp(c, HPolytope(a, b));
  if (r.status != LpStatus::Optimal) return std::nullopt;
  return ChebyshevBall{r.x.head(n), std::max(0.0, r.x(n))};
}

}  // namespace uvnet
