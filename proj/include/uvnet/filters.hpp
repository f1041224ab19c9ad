#pragma once

#include <optional>
#include <vector>

#include "uvnet/network.hpp"

namespace uvnet {

/// Relation ||y - x - offset||_inf <= half_width over (x, y), both of
/// dimension offset.size().
Region box_relation(const Vector& offset, double half_width);
Region box_relation(std::size_t dim, double half_width);

/// Two-dimensional relation |u_1|, |u_2| <= r and |u_1 +- u_2| <= r sqrt(2)
/// with u = y - x - offset: the regular octagon circumscribing the disc of
/// radius r.
Region octagon_relation(const Vector& offset, double r);

// Naive Bayes ---------------------------------------------------------------------

struct NaiveBayesModel {
  Region prior;
  std::vector<ConditionalMap> observations;
};

/// Prior intersected with the information map of every observation.
Region naive_bayes_posterior(const NaiveBayesModel& m, const std::vector<Vector>& ys);

/// Node 1 is the state "x"; node k + 2 is observation k, named "y<k+1>".
UncertaintyNetwork star_network(const NaiveBayesModel& m, DefinitenessPolicy policy = DefinitenessPolicy::Reject);

// Dynamics ---------------------------------------------------------------------

struct DynamicsModel {
  Region prior;
  std::vector<ConditionalMap> transitions;   // step t maps X_{t-1} to X_t
  std::vector<ConditionalMap> observations;  // step t maps X_t to Y_t

  std::size_t horizon() const { return transitions.size(); }
  std::size_t state_dim() const { return prior.dim(); }
};

struct FilterResult {
  std::vector<Region> posteriors;  // R_1 .. R_t
  std::optional<std::size_t> empty_step;
};

/// Predict by projecting the prior joined with the transition, update by
/// intersecting with the information map. Stops at the first empty
/// posterior and reports its step.
FilterResult set_membership_filter(const DynamicsModel& d, const std::vector<Vector>& ys);

/// Chain X_0 -> X_1 -> ... -> X_T with X_t -> Y_t. Node t is X_t (named
/// "x<t>") and node T + t is Y_t (named "y<t>").
UncertaintyNetwork trajectory_network(const DynamicsModel& d, DefinitenessPolicy policy = DefinitenessPolicy::Reject);

/// Posterior over (X_0, ..., X_T) given every measurement.
Region batch_trajectory_posterior(const DynamicsModel& d, const std::vector<Vector>& ys);

// Localization scenario --------------------------------------------------------------

struct Sensor {
  Vector beacon;
  double sigma = 1.0;
};

/// Beacons report the position relative to themselves with bounded error.
struct Scenario {
  Box world;
  std::vector<Box> obstacles;
  std::vector<Sensor> sensors;
  bool octagon = false;
};

/// World minus the interiors of the obstacles, as a union of boxes obtained
/// by guillotine cuts.
Region free_space(const Box& world, const std::vector<Box>& obstacles);

/// Relation between a position and one sensor's reading.
Region sensor_relation(const Sensor& s, bool octagon);

NaiveBayesModel build_localization_scenario(const Scenario& s);

/// Dynamics on the free space: each step moves at most `motion` per axis and
/// every sensor reports once per step (readings stacked in sensor order).
DynamicsModel build_tracking_model(const Scenario& s, double motion, std::size_t horizon);

}  // namespace uvnet
