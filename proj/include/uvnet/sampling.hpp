#pragma once

#include <random>
#include <vector>

#include "uvnet/region.hpp"

namespace uvnet {

/// Half-width of the window used in place of an infinite side when sampling
/// unbounded regions.
inline constexpr double kSampleWindow = 1e3;

/// Uniform draw from a box; infinite sides are replaced by a window of
/// `kSampleWindow` around the finite side (or the origin).
Vector sample_box(const Box& box, std::mt19937_64& rng);

/// Hit-and-run walk inside a nonempty polytope, started at its Chebyshev
/// center. Returns `count` points (the first is the center itself).
std::vector<Vector> hit_and_run(const HPolytope& p, std::size_t count, std::mt19937_64& rng);

/// Points of r drawn with the seed and count in `opts`. Polytopic regions use
/// hit-and-run per piece, ellipsoids direct uniform sampling, oracles
/// rejection from their bounding box (only accepted points are returned).
std::vector<Vector> sample_points(const Region& r, const SampleOptions& opts);

}  // namespace uvnet
