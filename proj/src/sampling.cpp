#include "uvnet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uvnet/lp.hpp"

namespace uvnet {

namespace {

std::pair<double, double> window(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) return {lo, hi};
  if (std::isfinite(lo)) return {lo, lo + kSampleWindow};
  if (std::isfinite(hi)) return {hi - kSampleWindow, hi};
  return {-kSampleWindow, kSampleWindow};
}

Vector random_direction(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector d(n);
  do {
    for (std::size_t i = 0; i < n; ++i) d(i) = normal(rng);
  } while (d.norm() < 1e-12);
  return d.normalized();
}

}  // namespace

Vector sample_box(const Box& box, std::mt19937_64& rng) {
  Vector x(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const auto [lo, hi] = window(box.lower(i), box.upper(i));
    x(i) = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return x;
}

std::vector<Vector> hit_and_run(const HPolytope& p, std::size_t count, std::mt19937_64& rng) {
  std::vector<Vector> out;
  if (count == 0) return out;
  const auto ball = chebyshev_ball(p);
  if (!ball) return out;
  const std::size_t n = p.dim();
  Vector x = ball->center;
  out.push_back(x);
  if (n == 0) {
    out.resize(count, x);
    return out;
  }
  const Vector lo = x.array() - kSampleWindow;
  const Vector hi = x.array() + kSampleWindow;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (out.size() < count) {
    const Vector d = random_direction(n, rng);
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.rows(); ++i) {
      const double ad = p.a().row(i).dot(d);
      const double slack = std::max(0.0, p.b()(i) - p.a().row(i).dot(x));
      if (ad > 1e-14) tmax = std::min(tmax, slack / ad);
      else if (ad < -1e-14) tmin = std::max(tmin, slack / ad);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(d(i)) < 1e-14) continue;
      const double t1 = (lo(i) - x(i)) / d(i);
      const double t2 = (hi(i) - x(i)) / d(i);
      tmin = std::max(tmin, std::min(t1, t2));
      tmax = std::min(tmax, std::max(t1, t2));
    }
    if (tmax > tmin) x += (tmin + unit(rng) * (tmax - tmin)) * d;
    out.push_back(x);
  }
  return out;
}

std::vector<Vector> sample_points(const Region& r, const SampleOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<Vector> out;
  if (r.is<EmptySet>() || opts.count == 0) return out;
  if (r.is_polytopic()) {
    std::vector<HPolytope> pieces = polytope_pieces(r);
    const std::size_t per_piece = std::max<std::size_t>(1, opts.count / std::max<std::size_t>(1, pieces.size()));
    for (const auto& piece : pieces) {
      auto pts = hit_and_run(piece, per_piece, rng);
      out.insert(out.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
    }
    return out;
  }
  if (const auto* e = r.as<Ellipsoid>()) {
    const std::size_t n = e->dim();
    const Matrix l = e->shape.llt().matrixL();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < opts.count; ++k) {
      const double radius = std::pow(unit(rng), 1.0 / static_cast<double>(n));
      out.push_back(e->center + std::sqrt(e->level) * radius * (l * random_direction(n, rng)));
    }
    return out;
  }
  const auto& o = *r.as<MembershipOracle>();
  for (std::size_t k = 0; k < opts.count; ++k) {
    Vector x = sample_box(o.bounds, rng);
    if (o.predicate(x)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace uvnet
