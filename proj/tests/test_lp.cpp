#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "uvnet/lp.hpp"

using namespace uvnet;
using namespace uvnet::test;

TEST_CASE("solve_lp on the unit square") {
  const auto sq = HPolytope::from_box(Box(vec({0, 0}), vec({1, 1})));
  const auto r = solve_lp(vec({-1, -1}), sq);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(-2.0));
  CHECK(r.x(0) == doctest::Approx(1.0));
  CHECK(r.x(1) == doctest::Approx(1.0));
}

TEST_CASE("solve_lp reports infeasibility") {
  const HPolytope p(mat({{1}, {-1}}), vec({0, -1}));
  CHECK(solve_lp(vec({1}), p).status == LpStatus::Infeasible);
}

TEST_CASE("solve_lp reports unboundedness") {
  const HPolytope p(mat({{-1}}), vec({0}));
  CHECK(solve_lp(vec({-1}), p).status == LpStatus::Unbounded);
  CHECK(solve_lp(vec({1}), p).status == LpStatus::Optimal);
}

TEST_CASE("solve_lp over the tetrahedron attains -2 on the top face") {
  const Region tet_region = tetrahedron();
  const auto& tet = *tet_region.as<HPolytope>();
  const auto r = solve_lp(vec({-1, -1, -1}), tet);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(r.x.sum() == doctest::Approx(2.0));
  CHECK(vertex_enumeration_min(tet, vec({-1, -1, -1})) == doctest::Approx(-2.0));
}

TEST_CASE("solve_lp handles degenerate and redundant rows") {
  // Three copies of the same face plus an equality expressed as two rows.
  const HPolytope p(mat({{1, 0}, {1, 0}, {2, 0}, {0, 1}, {0, -1}, {-1, 0}}), vec({1, 1, 2, 0.5, -0.5, 0}));
  const auto r = solve_lp(vec({-1, 0}), p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(-1.0));
  CHECK(r.x(1) == doctest::Approx(0.5));
}

TEST_CASE("solve_lp with no rows") {
  const HPolytope p(2);
  CHECK(solve_lp(vec({0, 0}), p).status == LpStatus::Optimal);
  CHECK(solve_lp(vec({1, 0}), p).status == LpStatus::Unbounded);
}

TEST_CASE("solve_lp matches vertex enumeration on random bounded polytopes") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_polytope(rng, 3, 4, random_vector(rng, 3, -2, 2));
    const Vector c = random_vector(rng, 3, -1, 1);
    const auto r = solve_lp(c, p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(std::abs(r.value - vertex_enumeration_min(p, c)) <= 1e-8);
    CHECK((p.a() * r.x - p.b()).maxCoeff() <= 1e-9);
  }
}

TEST_CASE("chebyshev_ball of a square and of an empty set") {
  const auto ball = chebyshev_ball(HPolytope::from_box(Box(vec({0, 0}), vec({4, 2}))), 10.0);
  REQUIRE(ball);
  CHECK(ball->radius == doctest::Approx(1.0));
  CHECK(ball->center(1) == doctest::Approx(1.0));
  CHECK_FALSE(chebyshev_ball(HPolytope(mat({{1}, {-1}}), vec({0, -1}))));
}
