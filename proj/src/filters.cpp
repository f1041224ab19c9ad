#include "uvnet/filters.hpp"

#include <cmath>
#include <numeric>

namespace uvnet {

namespace {

IndexList range(std::size_t begin, std::size_t end) {
  IndexList out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

void guillotine(const Box& w, const std::vector<Box>& obstacles, std::size_t next, std::vector<Box>& out) {
  const auto n = static_cast<Eigen::Index>(w.dim());
  for (Eigen::Index k = 0; k < n; ++k)
    if (w.upper(k) - w.lower(k) <= kFeasTol) return;
  for (std::size_t o = next; o < obstacles.size(); ++o) {
    const Box& ob = obstacles[o];
    bool overlaps = true;
    for (Eigen::Index k = 0; k < n; ++k) {
      overlaps = overlaps && ob.lower(k) < w.upper(k) - kFeasTol && ob.upper(k) > w.lower(k) + kFeasTol;
    }
    if (!overlaps) continue;
    // Slabs below and above the obstacle along each axis in turn; earlier
    // axes are clipped to the obstacle's extent.
    Box core = w;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double lo = std::max(ob.lower(k), w.lower(k));
      const double hi = std::min(ob.upper(k), w.upper(k));
      Box below = core;
      below.upper(k) = lo;
      guillotine(below, obstacles, o + 1, out);
      Box above = core;
      above.lower(k) = hi;
      guillotine(above, obstacles, o + 1, out);
      core.lower(k) = lo;
      core.upper(k) = hi;
    }
    return;
  }
  out.push_back(w);
}

}  // namespace

Region box_relation(const Vector& offset, double half_width) {
  if (!(half_width >= 0)) throw Error("box relation needs a nonnegative half-width");
  const auto n = offset.size();
  Matrix a = Matrix::Zero(2 * n, 2 * n);
  Vector b(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a(2 * k, k) = -1;
    a(2 * k, n + k) = 1;
    b(2 * k) = half_width + offset(k);
    a(2 * k + 1, k) = 1;
    a(2 * k + 1, n + k) = -1;
    b(2 * k + 1) = half_width - offset(k);
  }
  return Region::polytope(a, b);
}

Region box_relation(std::size_t dim, double half_width) {
  return box_relation(Vector::Zero(static_cast<Eigen::Index>(dim)), half_width);
}

Region octagon_relation(const Vector& offset, double r) {
  if (offset.size() != 2) throw DimensionMismatch("octagon relation is two-dimensional");
  if (!(r > 0)) throw Error("octagon relation needs a positive radius");
  const double d = r * std::sqrt(2.0);
  const double normals[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  Matrix a(8, 4);
  Vector b(8);
  for (int k = 0; k < 8; ++k) {
    const double u0 = normals[k][0];
    const double u1 = normals[k][1];
    a.row(k) << -u0, -u1, u0, u1;
    b(k) = (k < 4 ? r : d) + u0 * offset(0) + u1 * offset(1);
  }
  return Region::polytope(a, b);
}

// Naive Bayes -------------------------------------------------------------------

Region naive_bayes_posterior(const NaiveBayesModel& m, const std::vector<Vector>& ys) {
  if (ys.size() != m.observations.size()) {
    throw Error("naive_bayes_posterior: " + std::to_string(ys.size()) + " observations for " +
                std::to_string(m.observations.size()) + " maps");
  }
  Region out = m.prior;
  for (std::size_t k = 0; k < ys.size(); ++k) out = intersect(out, information_map(m.observations[k], ys[k]));
  return out;
}

UncertaintyNetwork star_network(const NaiveBayesModel& m, DefinitenessPolicy policy) {
  NodeList nodes{1};
  std::vector<Edge> edges;
  std::map<NodeId, VariableSignature> vars{{1, {"x", m.prior.dim()}}};
  std::map<NodeId, Region> factors{{1, m.prior}};
  for (std::size_t k = 0; k < m.observations.size(); ++k) {
    const auto& obs = m.observations[k];
    if (obs.given_dim() != m.prior.dim()) throw DimensionMismatch("observation map does not take the state");
    const NodeId id = static_cast<NodeId>(k) + 2;
    nodes.push_back(id);
    edges.emplace_back(1, id);
    vars[id] = {"y" + std::to_string(k + 1), obs.target.dim};
    factors.emplace(id, obs.relation);
  }
  return UncertaintyNetwork(Dag(nodes, edges), vars, factors, policy);
}

// Dynamics ---------------------------------------------------------------------

FilterResult set_membership_filter(const DynamicsModel& d, const std::vector<Vector>& ys) {
  const std::size_t t_max = d.horizon();
  if (d.observations.size() != t_max) throw Error("dynamics model needs one observation map per step");
  if (ys.size() != t_max) {
    throw Error("set_membership_filter: " + std::to_string(ys.size()) + " measurements for horizon " +
                std::to_string(t_max));
  }
  const std::size_t n = d.state_dim();
  FilterResult out;
  Region r = d.prior;
  for (std::size_t t = 1; t <= t_max; ++t) {
    const ConditionalMap step({"previous", n}, {"next", n}, d.transitions[t - 1].relation);
    const Region predicted = marginal(otimes(r, step), {"next"});
    r = intersect(predicted, information_map(d.observations[t - 1], ys[t - 1]));
    if (is_empty(r) == Verdict::True) {
      out.posteriors.push_back(Region::empty(n));
      out.empty_step = t;
      return out;
    }
    out.posteriors.push_back(r);
  }
  return out;
}

UncertaintyNetwork trajectory_network(const DynamicsModel& d, DefinitenessPolicy policy) {
  const auto t_max = static_cast<NodeId>(d.horizon());
  if (d.observations.size() != d.horizon()) throw Error("dynamics model needs one observation map per step");
  const std::size_t n = d.state_dim();
  NodeList nodes;
  std::vector<Edge> edges;
  std::map<NodeId, VariableSignature> vars;
  std::map<NodeId, Region> factors;
  for (NodeId t = 0; t <= t_max; ++t) {
    nodes.push_back(t);
    vars[t] = {"x" + std::to_string(t), n};
    factors.emplace(t, t == 0 ? d.prior : d.transitions[static_cast<std::size_t>(t - 1)].relation);
    if (t > 0) edges.emplace_back(t - 1, t);
  }
  for (NodeId t = 1; t <= t_max; ++t) {
    const auto& obs = d.observations[static_cast<std::size_t>(t - 1)];
    nodes.push_back(t_max + t);
    vars[t_max + t] = {"y" + std::to_string(t), obs.target.dim};
    factors.emplace(t_max + t, obs.relation);
    edges.emplace_back(t, t_max + t);
  }
  return UncertaintyNetwork(Dag(nodes, edges), vars, factors, policy);
}

Region batch_trajectory_posterior(const DynamicsModel& d, const std::vector<Vector>& ys) {
  if (ys.size() != d.horizon()) throw Error("batch_trajectory_posterior: one measurement per step is required");
  const UncertaintyNetwork net = trajectory_network(d, DefinitenessPolicy::Skip);
  const auto t_max = static_cast<NodeId>(d.horizon());
  NodeEvidence evidence;
  NodeSet query;
  for (NodeId t = 0; t <= t_max; ++t) query.insert(t);
  for (NodeId t = 1; t <= t_max; ++t) evidence[t_max + t] = ys[static_cast<std::size_t>(t - 1)];
  return network_posterior(net, evidence, query);
}

// Scenario ---------------------------------------------------------------------

Region free_space(const Box& world, const std::vector<Box>& obstacles) {
  if (!world.bounded()) throw Error("world must be a bounded box");
  for (const auto& o : obstacles)
    if (o.dim() != world.dim()) throw DimensionMismatch("obstacle dimension differs from the world");
  std::vector<Box> pieces;
  guillotine(world, obstacles, 0, pieces);
  if (pieces.empty()) throw Error("obstacles cover the whole world");
  std::vector<HPolytope> polys;
  for (const auto& b : pieces) polys.push_back(HPolytope::from_box(b));
  return Region::union_of(std::move(polys), world.dim());
}

Region sensor_relation(const Sensor& s, bool octagon) {
  if (!(s.sigma > 0)) throw Error("sensor noise bound must be positive");
  const Vector offset = -s.beacon;
  return octagon ? octagon_relation(offset, s.sigma) : box_relation(offset, s.sigma);
}

NaiveBayesModel build_localization_scenario(const Scenario& s) {
  if (s.sensors.empty()) throw Error("scenario needs at least one sensor");
  const std::size_t n = s.world.dim();
  NaiveBayesModel m{free_space(s.world, s.obstacles), {}};
  for (std::size_t k = 0; k < s.sensors.size(); ++k) {
    if (static_cast<std::size_t>(s.sensors[k].beacon.size()) != n) {
      throw DimensionMismatch("sensor beacon dimension differs from the world");
    }
    m.observations.emplace_back(VariableSignature{"x", n}, VariableSignature{"y" + std::to_string(k + 1), n},
                                sensor_relation(s.sensors[k], s.octagon));
  }
  return m;
}

DynamicsModel build_tracking_model(const Scenario& s, double motion, std::size_t horizon) {
  const NaiveBayesModel static_model = build_localization_scenario(s);
  const std::size_t n = s.world.dim();
  const std::size_t k = s.sensors.size();
  const Region transition = intersect(box_relation(n, motion), product(Region::full(n), static_model.prior));
  Region reading = Region::full(n + n * k);
  for (std::size_t j = 0; j < k; ++j) {
    IndexList targets = range(0, n);
    for (std::size_t c = 0; c < n; ++c) targets.push_back(n + j * n + c);
    reading = intersect(reading, embed(static_model.observations[j].relation, n + n * k, targets));
  }
  DynamicsModel d{static_model.prior, {}, {}};
  for (std::size_t t = 0; t < horizon; ++t) {
    d.transitions.emplace_back(VariableSignature{"previous", n}, VariableSignature{"next", n}, transition);
    d.observations.emplace_back(VariableSignature{"x", n}, VariableSignature{"y", n * k}, reading);
  }
  return d;
}

}  // namespace uvnet
