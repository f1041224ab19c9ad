#pragma once

#include "fixtures.hpp"
#include "uvnet/estimate.hpp"
#include "uvnet/filters.hpp"

namespace uvnet::test {

/// Planar state with no prior knowledge and three readings, each within an
/// axis-aligned square of side 2 around the state.
inline UncertaintyNetwork square_star() {
  NaiveBayesModel m{Region::full(2), {}};
  for (int k = 0; k < 3; ++k) {
    m.observations.emplace_back(VariableSignature{"x", 2}, VariableSignature{"y", 2}, box_relation(2, 1.0));
  }
  return star_network(m);
}

inline NodeEvidence square_readings() {
  return {{2, vec({0, 0})}, {3, vec({1, 0})}, {4, vec({5, 4})}};
}

/// Brute-force minimum of sum_k ||x - y_k||_inf over a grid on [lo, hi]^2.
inline double grid_min_linf_sum(const std::vector<Vector>& ys, double lo, double hi, double step) {
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  double best = INFINITY;
  for (long i = 0; i <= count; ++i) {
    const double x0 = lo + static_cast<double>(i) * step;
    for (long j = 0; j <= count; ++j) {
      const double x1 = lo + static_cast<double>(j) * step;
      double s = 0;
      for (const auto& y : ys) s += std::max(std::abs(x0 - y(0)), std::abs(x1 - y(1)));
      best = std::min(best, s);
    }
  }
  return best;
}

}  // namespace uvnet::test
