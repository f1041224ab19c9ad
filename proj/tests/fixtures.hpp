#pragma once

#include <random>
#include <vector>

#include "uvnet/region.hpp"

namespace uvnet::test {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto cols = rows.begin()->size();
  Matrix m(rows.size(), cols);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

/// The pairwise-but-not-totally independent set of three scalars.
inline Region tetrahedron() {
  return Region::polytope(mat({{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}}), vec({2, 0, 0, 0}));
}

/// Joint set over (x, y) with U_X = [0, 5] and the piecewise conditional
/// [5/2 - x, 5/2 + x] / [x - 5/2, 15/2 - x].
inline Region diamond() {
  return Region::polytope(mat({{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}), vec({-2.5, 2.5, 2.5, 7.5}));
}

inline Region unit_square() { return Region::box(vec({0, 0}), vec({1, 1})); }

inline Region unit_cube_polytope() {
  return Region::polytope(HPolytope::from_box(Box(vec({0, 0, 0}), vec({1, 1, 1}))));
}

/// Random bounded polytope: a box around `center` cut by extra random
/// half-spaces that keep `center` strictly inside.
inline HPolytope random_polytope(std::mt19937_64& rng, std::size_t n, std::size_t extra_rows, const Vector& center,
                                 double half_width = 1.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  const std::size_t m = 2 * n + extra_rows;
  Matrix a = Matrix::Zero(m, n);
  Vector b(m);
  for (std::size_t i = 0; i < n; ++i) {
    a(2 * i, i) = 1.0;
    b(2 * i) = center(i) + half_width * unit(rng);
    a(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -center(i) + half_width * unit(rng);
  }
  for (std::size_t k = 0; k < extra_rows; ++k) {
    Vector d(n);
    for (std::size_t j = 0; j < n; ++j) d(j) = normal(rng);
    d.normalize();
    a.row(2 * n + k) = d.transpose();
    b(2 * n + k) = d.dot(center) + half_width * unit(rng) * 0.8;
  }
  return HPolytope(a, b);
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace uvnet::test
