#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "random_models.hpp"
#include "uvnet/filters.hpp"

using namespace uvnet;
using namespace uvnet::test;

namespace {

const VariableSignature kX{"x", 1};

ConditionalMap reading(double w) { return ConditionalMap(kX, {"y", 1}, box_relation(1, w)); }

// Prior [0, 1], |x_t - x_{t-1}| <= 0.5, |y_t - x_t| <= 0.3.
DynamicsModel integrator(std::size_t t_max, double noise = 0.3) {
  DynamicsModel d{Region::interval(0, 1), {}, {}};
  for (std::size_t t = 0; t < t_max; ++t) {
    d.transitions.emplace_back(VariableSignature{"previous", 1}, VariableSignature{"next", 1}, box_relation(1, 0.5));
    d.observations.push_back(reading(noise));
  }
  return d;
}

Region x_block(const Region& trajectory, std::size_t t, std::size_t n) {
  IndexList keep;
  for (std::size_t c = 0; c < n; ++c) keep.push_back(t * n + c);
  return project(trajectory, keep);
}

}  // namespace

TEST_CASE("relations") {
  const Region r = box_relation(vec({1, -1}), 0.5);
  CHECK(contains(r, vec({0, 0, 1.5, -0.5})));
  CHECK_FALSE(contains(r, vec({0, 0, 1.6, -1})));
  const Region oct = octagon_relation(vec({0, 0}), 1.0);
  for (int k = 0; k < 360; ++k) {
    const double a = k * std::numbers::pi / 180;
    CHECK(contains(oct, vec({0, 0, std::cos(a), std::sin(a)})));
  }
  CHECK_FALSE(contains(oct, vec({0, 0, 1.0, 1.0})));
  CHECK(contains(oct, vec({0, 0, 1.0, 0.4})));
}

TEST_CASE("naive_bayes_posterior") {
  const NaiveBayesModel m{Region::interval(0, 10), {reading(1), reading(1)}};
  CHECK(regions_equal(naive_bayes_posterior(m, {vec({3}), vec({4})}), Region::interval(3, 4)) == Verdict::True);
  CHECK(is_empty(naive_bayes_posterior(m, {vec({0}), vec({5})})) == Verdict::True);
  CHECK(regions_equal(naive_bayes_posterior({Region::interval(0, 10), {}}, {}), Region::interval(0, 10)) ==
        Verdict::True);
  CHECK_THROWS(naive_bayes_posterior(m, {vec({3})}));
}

TEST_CASE("set_membership_filter on an integrator") {
  const DynamicsModel d = integrator(2);
  const FilterResult f = set_membership_filter(d, {vec({1.0}), vec({1.4})});
  REQUIRE(f.posteriors.size() == 2);
  CHECK_FALSE(f.empty_step.has_value());
  CHECK(regions_equal(f.posteriors[0], Region::interval(0.7, 1.3)) == Verdict::True);
  CHECK(regions_equal(f.posteriors[1], Region::interval(1.1, 1.7)) == Verdict::True);

  const Region batch = batch_trajectory_posterior(d, {vec({1.0}), vec({1.4})});
  CHECK(regions_equal(x_block(batch, 2, 1), Region::interval(1.1, 1.7)) == Verdict::True);
  const Region smoothed = x_block(batch, 0, 1);
  CHECK(is_subset(smoothed, d.prior) == Verdict::True);
  CHECK(regions_equal(smoothed, Region::interval(0.2, 1)) == Verdict::True);

  CHECK(regions_equal(batch_trajectory_posterior(integrator(0), {}), Region::interval(0, 1)) == Verdict::True);

  const FilterResult exact = set_membership_filter(integrator(1, 0.0), {vec({0.8})});
  CHECK(regions_equal(exact.posteriors[0], Region::interval(0.8, 0.8)) == Verdict::True);

  const FilterResult lost = set_membership_filter(d, {vec({1.0}), vec({3.0})});
  REQUIRE(lost.empty_step.has_value());
  CHECK(*lost.empty_step == 2);
  CHECK(is_empty(lost.posteriors.back()) == Verdict::True);
  CHECK_THROWS(set_membership_filter(d, {vec({1.0})}));
}

TEST_CASE("property: triangulation equals the star network posterior") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 2;
    const std::size_t k = rng() % 4;
    NaiveBayesModel m{Region::polytope(random_polytope(rng, n, rng() % 2, random_vector(rng, n, -1, 1), 2.0)), {}};
    std::vector<Vector> ys;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t dy = 1 + rng() % 2;
      m.observations.emplace_back(VariableSignature{"x", n}, VariableSignature{"y", dy},
                                  random_definite_relation(rng, n, dy, rng() % 2));
      ys.push_back(random_vector(rng, dy, -1.5, 1.5));
    }
    NodeEvidence ev;
    for (std::size_t i = 0; i < k; ++i) ev[static_cast<NodeId>(i) + 2] = ys[i];
    const Region direct = naive_bayes_posterior(m, ys);
    CHECK(regions_equal(direct, network_posterior(star_network(m), ev, {1})) == Verdict::True);
    // Dropping the last reading never shrinks the posterior.
    if (k > 0) {
      NaiveBayesModel fewer = m;
      fewer.observations.pop_back();
      std::vector<Vector> fewer_ys(ys.begin(), ys.end() - 1);
      CHECK(is_subset(direct, naive_bayes_posterior(fewer, fewer_ys)) == Verdict::True);
    }
  }
}

TEST_CASE("property: recursion equals batch and contains the truth") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 1 + rng() % 2;
    const std::size_t t_max = 1 + rng() % 3;
    const DynamicsModel d = random_dynamics(rng, n, t_max);
    const Trajectory truth = simulate(rng, d);
    const FilterResult f = set_membership_filter(d, truth.measurements);
    REQUIRE_FALSE(f.empty_step.has_value());
    for (std::size_t t = 1; t <= t_max; ++t) CHECK(contains(f.posteriors[t - 1], truth.states[t]));
    const Region batch = batch_trajectory_posterior(d, truth.measurements);
    CHECK(regions_equal(f.posteriors.back(), x_block(batch, t_max, n)) == Verdict::True);
  }
}

TEST_CASE("free_space") {
  const Box world(vec({0, 0}), vec({10, 4}));
  const std::vector<Box> obstacles{Box(vec({4, 0}), vec({6, 3})), Box(vec({8, 1}), vec({9, 2}))};
  const Region free = free_space(world, obstacles);
  CHECK(free.is<PolytopeUnion>());
  CHECK(free.as<PolytopeUnion>()->pieces.size() <= 4 * obstacles.size() + 1);
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const Vector p = vec({i * 0.1 + 0.05, j * 0.1 + 0.05});
      bool blocked = false;
      for (const auto& o : obstacles)
        blocked = blocked || ((p.array() > o.lower.array()).all() && (p.array() < o.upper.array()).all());
      const bool inside = (p.array() <= world.upper.array()).all();
      CHECK(contains(free, p) == (inside && !blocked));
    }
  }
  CHECK(connected_components(free).size() == 1);
  CHECK_THROWS(free_space(world, {Box(vec({-1, -1}), vec({11, 5}))}));
}

TEST_CASE("localization scenario") {
  Scenario s{Box(vec({0, 0}), vec({10, 4})), {Box(vec({4, 0}), vec({6, 3}))}, {}, false};
  s.sensors = {{vec({0, 0}), 3.0}, {vec({0, 0}), 4.0}, {vec({10, 4}), 5.0}};
  const NaiveBayesModel m = build_localization_scenario(s);
  // Together the readings allow [2, 8] x [0, 2.5], which the obstacle splits.
  const std::vector<Vector> ys{vec({5, -0.5}), vec({5, 1}), vec({-5, -3})};
  const Region post = naive_bayes_posterior(m, ys);
  CHECK(connected_components(post).size() == 2);
  CHECK(contains(post, vec({3, 1})));
  CHECK(contains(post, vec({7, 1})));
  CHECK_FALSE(contains(post, vec({5, 3.5})));

  Scenario vague{s.world, s.obstacles, {{vec({5, 2}), 100.0}}, false};
  const NaiveBayesModel mv = build_localization_scenario(vague);
  CHECK(regions_equal(naive_bayes_posterior(mv, {vec({0, 0})}), mv.prior) == Verdict::True);

  Scenario oct = s;
  oct.octagon = true;
  const Region post_oct = naive_bayes_posterior(build_localization_scenario(oct), ys);
  CHECK(is_subset(post_oct, post) == Verdict::True);
  CHECK_THROWS(build_localization_scenario({s.world, {}, {}, false}));
}

TEST_CASE("tracking keeps the truth in every step") {
  Scenario s{Box(vec({0, 0}), vec({10, 4})), {Box(vec({4, 0}), vec({6, 3}))}, {}, false};
  s.sensors = {{vec({0, 0}), 0.5}, {vec({10, 4}), 0.5}};
  const DynamicsModel d = build_tracking_model(s, 0.5, 4);
  std::mt19937_64 rng(53);
  for (int run = 0; run < 5; ++run) {
    const Trajectory truth = simulate(rng, d);
    const FilterResult f = set_membership_filter(d, truth.measurements);
    REQUIRE_FALSE(f.empty_step.has_value());
    for (std::size_t t = 1; t <= d.horizon(); ++t) CHECK(contains(f.posteriors[t - 1], truth.states[t]));
  }
}
