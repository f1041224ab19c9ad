#pragma once

#include "uvnet/region.hpp"

namespace uvnet {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double value = 0.0;
};

/// min c^T x subject to A x <= b with x free.
struct LpProblem {
  Vector objective;
  HPolytope constraints;
};

/// Dense two-phase simplex with Bland's anti-cycling rule.
LpResult solve_lp(const LpProblem& p);
LpResult solve_lp(const Vector& c, const HPolytope& constraints);

/// Center and radius of the largest ball inscribed in p. The radius is
/// capped at `cap` so that unbounded polytopes still have a center.
struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
};
std::optional<ChebyshevBall> chebyshev_ball(const HPolytope& p, double cap = 1.0);

/// Pivot tolerance of the simplex.
inline constexpr double kPivotTol = 1e-10;

}  // namespace uvnet
