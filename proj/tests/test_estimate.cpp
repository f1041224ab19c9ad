#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "random_models.hpp"
#include "scenarios.hpp"
#include "uvnet/estimate.hpp"
#include "uvnet/lp.hpp"

using namespace uvnet;
using namespace uvnet::test;

namespace {

std::map<NodeId, VariableSignature> scalars(const Dag& g) {
  std::map<NodeId, VariableSignature> out;
  for (NodeId i : g.nodes()) out[i] = {"x" + std::to_string(i), 1};
  return out;
}

// |x1| <= 1 and |x2 - x1| <= 1.
UncertaintyNetwork symmetric_chain() {
  const Dag g({1, 2}, {{1, 2}});
  return UncertaintyNetwork(g, scalars(g), {{1, Region::interval(-1, 1)}, {2, box_relation(1, 1.0)}});
}

// Three scalar readings of x with |y - x| <= 1 and no prior information.
UncertaintyNetwork interval_star(std::size_t k) {
  NaiveBayesModel m{Region::full(1), {}};
  for (std::size_t i = 0; i < k; ++i) m.observations.emplace_back(VariableSignature{"x", 1}, VariableSignature{"y", 1}, box_relation(1, 1.0));
  return star_network(m);
}

double linf_sum(const Vector& x, const NodeEvidence& ev) {
  double s = 0;
  for (const auto& [i, y] : ev) s += (x - y).cwiseAbs().maxCoeff();
  return s;
}

// Textbook conjugate update for a scalar Gaussian prior and one reading.
double conjugate_mean(double m0, double v0, double y, double v) { return (m0 * v + y * v0) / (v0 + v); }

GaussianNetwork scalar_pair(double prior_var, double obs_var) {
  const Dag g({1, 2}, {{1, 2}});
  return GaussianNetwork(g, scalars(g),
                         {{1, GaussianFactor::proper(Matrix(1, 0), vec({0}), mat({{prior_var}}))},
                          {2, GaussianFactor::proper(mat({{1}}), vec({0}), mat({{obs_var}}))}});
}

}  // namespace

TEST_CASE("square readings: objective against a grid search") {
  const UncertaintyNetwork n = square_star();
  const NodeEvidence ev = square_readings();
  const EstimateResult r = point_estimate_lp(n, ev);
  REQUIRE(r.status == EstimateStatus::Optimal);
  const double oracle = grid_min_linf_sum({vec({0, 0}), vec({1, 0}), vec({5, 4})}, -1, 6, 1e-3);
  CHECK(std::abs(r.objective - oracle) <= 1e-6);
  CHECK(std::abs(linf_sum(r.x_hat.at(1), ev) - r.objective) <= 1e-9);
  CHECK(r.beta.at(1) == 0.0);
  CHECK(r.beta.at(4) > r.beta.at(2));
  CHECK(r.beta.at(4) > r.beta.at(3));
  // The readings cannot all hold unscaled.
  CHECK(is_empty(posterior_set(n, ev)) == Verdict::True);
}

TEST_CASE("interior and far evidence on a chain") {
  const UncertaintyNetwork c = symmetric_chain();
  EstimateResult r = point_estimate_lp(c, {{2, vec({0})}});
  REQUIRE(r.status == EstimateStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.x_hat.at(1)(0) == doctest::Approx(0.0));
  CHECK(r.unique);

  r = point_estimate_lp(c, {{2, vec({10})}});
  REQUIRE(r.status == EstimateStatus::Optimal);
  double oracle = INFINITY;
  for (int k = 0; k <= 200000; ++k) {
    const double x = -5 + k * 1e-4;
    oracle = std::min(oracle, std::abs(x) + std::abs(10 - x));
  }
  CHECK(std::abs(r.objective - oracle) <= 1e-6);
  CHECK_FALSE(r.unique);
  CHECK(std::max(r.beta.at(1), r.beta.at(2)) > 1.0);
  const double x = r.x_hat.at(1)(0);
  CHECK(x >= -1e-9);
  CHECK(x <= 10 + 1e-9);
}

TEST_CASE("posterior_set") {
  const UncertaintyNetwork n = square_star();
  NodeEvidence same{{2, vec({1, 2})}, {3, vec({1, 2})}, {4, vec({1, 2})}};
  CHECK(regions_equal(posterior_set(n, same), Region::box(vec({0, 1}), vec({2, 3}))) == Verdict::True);
  NodeEvidence near{{2, vec({0, 0})}, {3, vec({1, 0.5})}, {4, vec({0.5, 1.5})}};
  CHECK(regions_equal(posterior_set(n, near), Region::box(vec({0, 0.5}), vec({1, 1}))) == Verdict::True);
  const EstimateResult r = point_estimate_lp(n, near);
  REQUIRE(r.status == EstimateStatus::Optimal);
  CHECK(contains(posterior_set(n, near), r.x_hat.at(1)));
  for (const auto& [i, b] : r.beta) CHECK(b <= 1 + 1e-9);
}

TEST_CASE("unsupported factors") {
  const Dag g({1, 2}, {{1, 2}});
  const UncertaintyNetwork ell(
      g, scalars(g),
      {{1, Region::ellipsoid(Ellipsoid(vec({0}), mat({{1}}), 1))}, {2, box_relation(1, 1.0)}});
  CHECK(point_estimate_lp(ell, {{2, vec({0})}}).status == EstimateStatus::BackendUnsupported);

  LpEstimateOptions opts;
  opts.centers[1] = vec({1});  // on the boundary of [-1, 1]
  CHECK(point_estimate_lp(symmetric_chain(), {{2, vec({0})}}, opts).status == EstimateStatus::BackendUnsupported);

  const UncertaintyNetwork point(g, scalars(g), {{1, Region::interval(2, 2)}, {2, box_relation(1, 1.0)}});
  CHECK(point_estimate_lp(point, {{2, vec({0})}}).status == EstimateStatus::BackendUnsupported);

  CHECK_THROWS(point_estimate_lp(symmetric_chain(), {{2, vec({0, 1})}}));
  CHECK_THROWS(point_estimate_lp(symmetric_chain(), {{9, vec({0})}}));
}

TEST_CASE("a nonempty posterior does not force every scale below one") {
  // Readings 0, 0 and 1.9: the posterior [0.9, 1] is nonempty, yet the sum
  // |x| + |x| + |x - 1.9| is minimized only at x = 0, where beta = 1.9.
  const UncertaintyNetwork n = interval_star(3);
  const NodeEvidence ev{{2, vec({0})}, {3, vec({0})}, {4, vec({1.9})}};
  CHECK(regions_equal(posterior_set(n, ev), Region::interval(0.9, 1)) == Verdict::True);
  const EstimateResult r = point_estimate_lp(n, ev);
  REQUIRE(r.status == EstimateStatus::Optimal);
  CHECK(r.unique);
  CHECK(r.x_hat.at(1)(0) == doctest::Approx(0.0));
  CHECK(r.beta.at(4) == doctest::Approx(1.9));
}

TEST_CASE("property: scaled rows are tight or the scale is zero") {
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const UncertaintyNetwork n = random_network(rng, {5, 2, 2, 0.6, 1.0});
    NodeEvidence ev;
    for (NodeId i : n.dag().nodes())
      if (n.dag().is_leaf(i) && n.dag().nodes().size() > 1)
        ev[i] = random_vector(rng, n.variable(i).dim, -3, 3);
    const EstimateResult r = point_estimate_lp(n, ev);
    if (r.status == EstimateStatus::BackendUnsupported) continue;
    REQUIRE(r.status == EstimateStatus::Optimal);
    ++checked;
    for (NodeId i : n.dag().nodes()) {
      const double beta = r.beta.at(i);
      CHECK(beta >= 0);
      if (beta <= 1e-9) continue;
      // Rebuild z = (parents, self) and the centered constraint.
      Vector z(static_cast<Eigen::Index>(n.factor(i).dim()));
      Eigen::Index k = 0;
      auto value = [&](NodeId j) { return ev.count(j) ? ev.at(j) : r.x_hat.at(j); };
      for (NodeId p : n.dag().parents(i)) {
        z.segment(k, value(p).size()) = value(p);
        k += value(p).size();
      }
      z.segment(k, value(i).size()) = value(i);
      const HPolytope& p = *n.factor(i).as<HPolytope>();
      const Vector center = p.b().minCoeff() > kFeasTol ? Vector::Zero(z.size()) : chebyshev_ball(p)->center;
      const Vector h = p.b() - p.a() * center;
      const Vector slack = beta * h - p.a() * (z - center);
      CHECK(slack.minCoeff() >= -1e-7);
      CHECK(slack.minCoeff() <= 1e-6);
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("property: translating evidence and centers translates the estimate") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    const UncertaintyNetwork n = interval_star(k);
    NodeEvidence ev;
    for (std::size_t i = 0; i < k; ++i) ev[static_cast<NodeId>(i) + 2] = random_vector(rng, 1, -4, 4);
    const double t = std::uniform_real_distribution<double>(-3, 3)(rng);
    // Centered rewrite about the translated origin: factor rows A z <= b
    // shifted by t become A (z - t) <= b.
    NaiveBayesModel shifted{Region::full(1), {}};
    for (std::size_t i = 0; i < k; ++i)
      shifted.observations.emplace_back(VariableSignature{"x", 1}, VariableSignature{"y", 1}, box_relation(1, 1.0));
    NodeEvidence ev_t;
    LpEstimateOptions opts;
    for (const auto& [i, y] : ev) {
      ev_t[i] = y + vec({t});
      opts.centers[i] = vec({t, t});
    }
    const EstimateResult a = point_estimate_lp(n, ev);
    const EstimateResult b = point_estimate_lp(star_network(shifted), ev_t, opts);
    REQUIRE(a.status == EstimateStatus::Optimal);
    REQUIRE(b.status == EstimateStatus::Optimal);
    CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-9));
    if (a.unique) CHECK(b.x_hat.at(1)(0) == doctest::Approx(a.x_hat.at(1)(0) + t).epsilon(1e-9));
  }
}

TEST_CASE("scaling a factor's rows and right-hand side leaves the program unchanged") {
  const UncertaintyNetwork n = square_star();
  const EstimateResult a = point_estimate_lp(n, square_readings());
  std::map<NodeId, Region> factors = n.factors();
  const HPolytope p = *factors.at(4).as<HPolytope>();
  factors.at(4) = Region::polytope(2.0 * p.a(), 2.0 * p.b());
  std::map<NodeId, VariableSignature> vars;
  for (NodeId i : n.dag().nodes()) vars[i] = n.variable(i);
  const EstimateResult b = point_estimate_lp(UncertaintyNetwork(n.dag(), vars, factors), square_readings());
  CHECK(b.objective == doctest::Approx(a.objective));
  CHECK(b.beta.at(4) == doctest::Approx(a.beta.at(4)));
}

TEST_CASE("format_estimate") {
  const EstimateResult r = point_estimate_lp(symmetric_chain(), {{2, vec({0})}});
  CHECK(format_estimate(r) == "status optimal\nobjective 0\nunique yes\nx 1 0\nbeta 1 0\nbeta 2 0\n");
}

TEST_CASE("gaussian point estimate") {
  const GaussianNetwork pair = scalar_pair(1, 1);
  EstimateResult r = point_estimate_gaussian(pair, {{2, vec({2})}});
  REQUIRE(r.status == EstimateStatus::Optimal);
  CHECK(r.x_hat.at(1)(0) == doctest::Approx(conjugate_mean(0, 1, 2, 1)).epsilon(1e-12));
  CHECK(r.x_hat.at(1)(0) == doctest::Approx(1.0));
  r = point_estimate_gaussian(scalar_pair(4, 0.5), {{2, vec({3})}});
  CHECK(r.x_hat.at(1)(0) == doctest::Approx(conjugate_mean(0, 4, 3, 0.5)).epsilon(1e-12));

  // Improper prior with equal-variance readings: the mean of the readings.
  const Dag g({1, 2, 3, 4}, {{1, 2}, {1, 3}, {1, 4}});
  std::map<NodeId, GaussianFactor> f{{1, GaussianFactor::flat(1, 0)}};
  for (NodeId i : {2, 3, 4}) f.emplace(i, GaussianFactor::proper(mat({{1}}), vec({0}), mat({{2}})));
  const GaussianNetwork star(g, scalars(g), f);
  r = point_estimate_gaussian(star, {{2, vec({1})}, {3, vec({4})}, {4, vec({7})}});
  REQUIRE(r.status == EstimateStatus::Optimal);
  CHECK(r.x_hat.at(1)(0) == doctest::Approx(4.0));
  CHECK(point_estimate_gaussian(star, {}).status == EstimateStatus::Unbounded);

  CHECK_THROWS(GaussianFactor::proper(Matrix(1, 0), vec({0}), mat({{0}})));
  CHECK_THROWS(GaussianFactor::proper(Matrix(2, 0), vec({0, 0}), mat({{1, 2}, {2, 1}})));
}

TEST_CASE("verify_map_equivalence") {
  auto rep = verify_map_equivalence(scalar_pair(1, 1), {{2, vec({2})}});
  CHECK(rep.pass);
  CHECK(rep.max_abs_diff <= 1e-12);

  const Dag g({1, 2, 3}, {{1, 2}, {2, 3}});
  const GaussianNetwork chain(g, scalars(g),
                              {{1, GaussianFactor::proper(Matrix(1, 0), vec({1}), mat({{1}}))},
                               {2, GaussianFactor::proper(mat({{0.5}}), vec({0}), mat({{4}}))},
                               {3, GaussianFactor::proper(mat({{2}}), vec({-1}), mat({{9}}))}});
  CHECK(verify_map_equivalence(chain, {{3, vec({4})}}).pass);
  CHECK(verify_map_equivalence(chain, {{2, vec({4})}}).pass);

  const GaussianSolver perturbed = [](const GaussianNetwork& n, const NodeEvidence& ev) {
    EstimateResult r = point_estimate_gaussian(n, ev);
    for (auto& [i, x] : r.x_hat) x.array() += 1e-3;
    return r;
  };
  rep = verify_map_equivalence(chain, {{3, vec({4})}}, perturbed);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_abs_diff == doctest::Approx(1e-3));
}

TEST_CASE("property: gaussian estimate is a stationary point and independent of eta") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const GaussianNetwork n = random_gaussian_network(rng, trial % 2 == 0);
    NodeEvidence ev;
    for (NodeId i : n.dag().nodes())
      if (i != 1 && rng() % 3 != 0) ev[i] = random_vector(rng, n.variable(i).dim, -3, 3);
    const EstimateResult r = point_estimate_gaussian(n, ev);
    REQUIRE(r.status == EstimateStatus::Optimal);
    CHECK(verify_map_equivalence(n, ev).pass);
    for (double eta : {0.5, 2.0}) {
      const EstimateResult s = point_estimate_gaussian(n, ev, eta);
      for (const auto& [i, x] : r.x_hat) CHECK((s.x_hat.at(i) - x).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // Central differences of the summed negative log densities.
    auto total = [&](const std::map<NodeId, Vector>& xs) {
      double s = 0;
      for (NodeId i : n.dag().nodes()) {
        auto value = [&](NodeId j) { return ev.count(j) ? ev.at(j) : xs.at(j); };
        Vector x_pa(static_cast<Eigen::Index>(n.parent_dim(i)));
        Eigen::Index k = 0;
        for (NodeId p : n.dag().parents(i)) {
          x_pa.segment(k, value(p).size()) = value(p);
          k += value(p).size();
        }
        s += n.neg_log_density(i, x_pa, value(i));
      }
      return s;
    };
    const double hstep = 1e-5;
    for (const auto& [i, x] : r.x_hat) {
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        auto plus = r.x_hat, minus = r.x_hat;
        plus[i](k) += hstep;
        minus[i](k) -= hstep;
        CHECK(std::abs((total(plus) - total(minus)) / (2 * hstep)) <= 1e-6);
      }
    }
  }
}
