#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "uvnet/types.hpp"

namespace uvnet {

/// Axis-aligned box; bounds may be infinite.
struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi);

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  bool bounded() const;
  static Box unbounded(std::size_t dim);
};

/// Convex polyhedron { x : A x <= b }.
class HPolytope {
 public:
  HPolytope() = default;
  explicit HPolytope(std::size_t dim);
  HPolytope(Matrix a, Vector b);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return static_cast<std::size_t>(a_.rows()); }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

  static HPolytope from_box(const Box& box);

  /// Rows of both operands, stacked.
  HPolytope stacked(const HPolytope& other) const;

 private:
  std::size_t dim_ = 0;
  Matrix a_;
  Vector b_;
};

/// { x : (x - center)^T shape^{-1} (x - center) <= level }.
struct Ellipsoid {
  Vector center;
  Matrix shape;
  double level = 1.0;

  Ellipsoid() = default;
  Ellipsoid(Vector c, Matrix q, double eta);

  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }
  double distance(const Vector& x) const;
};

/// Region known only through a membership predicate and a bounding box used
/// for sampling.
struct MembershipOracle {
  std::function<bool(const Vector&)> predicate;
  Box bounds;
};

struct EmptySet {};
struct FullSpace {};
struct PolytopeUnion {
  std::vector<HPolytope> pieces;
};

/// A subset of R^n in one of several representations. Values are immutable
/// once built.
class Region {
 public:
  using Body = std::variant<EmptySet, FullSpace, Box, HPolytope, PolytopeUnion, Ellipsoid,
                            MembershipOracle>;

  static Region empty(std::size_t dim);
  static Region full(std::size_t dim);
  static Region box(Box b);
  static Region box(const Vector& lo, const Vector& hi);
  static Region interval(double lo, double hi);
  static Region polytope(HPolytope p);
  static Region polytope(Matrix a, Vector b);
  /// Flat union; a single piece collapses to a polytope and no pieces to Empty.
  static Region union_of(std::vector<HPolytope> pieces, std::size_t dim);
  static Region ellipsoid(Ellipsoid e);
  static Region oracle(std::function<bool(const Vector&)> predicate, Box bounds);

  std::size_t dim() const { return dim_; }
  const Body& body() const { return body_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&body_);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(body_);
  }

  /// Empty, Full, Box, HPolytope or a union of polytopes.
  bool is_polytopic() const;
  /// Polytopic and convex (anything but a union).
  bool is_convex_polytopic() const;

  std::string kind() const;

 private:
  Region(std::size_t dim, Body body) : dim_(dim), body_(std::move(body)) {}

  std::size_t dim_ = 0;
  Body body_;
};

using IndexList = std::vector<std::size_t>;
using FixedValues = std::map<std::size_t, double>;

// Membership and emptiness -------------------------------------------------

bool contains(const Region& r, const Vector& x);

/// True: certainly empty. SampledTrue: oracle region with no sample hit.
Verdict is_empty(const Region& r, const SampleOptions& opts = {});

// Set algebra --------------------------------------------------------------

/// Projection onto the coordinates in `keep`; result coordinates follow the
/// order of `keep`.
Region project(const Region& r, const IndexList& keep);
Region intersect(const Region& r1, const Region& r2);
Region product(const Region& r1, const Region& r2);
/// Substitutes fixed coordinates; the result lives on the remaining
/// coordinates in ascending order.
Region slice(const Region& r, const FixedValues& fixed);
/// Coordinate j of the result is coordinate order[j] of r; `order` is a
/// permutation.
Region permute(const Region& r, const IndexList& order);
/// Lifts r into R^dim, sending coordinate k of r to coordinate targets[k];
/// other coordinates are unconstrained.
Region embed(const Region& r, std::size_t dim, const IndexList& targets);

// Linear functionals and inclusion ------------------------------------------

/// sup c^T x over r; nullopt when r is empty, +inf when unbounded.
std::optional<double> linear_max(const Region& r, const Vector& c);

Verdict is_subset(const Region& r1, const Region& r2, const SampleOptions& opts = {});
Verdict regions_equal(const Region& r1, const Region& r2, const SampleOptions& opts = {});

// Utilities ------------------------------------------------------------------

/// Tightest axis-aligned box containing r (infinite sides where unbounded);
/// nullopt for an empty region.
std::optional<Box> bounding_box(const Region& r);

/// Convex pieces of a polytopic region. Full yields one row-free polytope.
std::vector<HPolytope> polytope_pieces(const Region& r);

/// Drops every row implied by the others. The input must be nonempty.
HPolytope remove_redundancy(const HPolytope& p);

/// Fourier-Motzkin projection of a single polytope; callers normally use
/// `project`.
Region project_polytope(const HPolytope& p, const IndexList& keep);

/// Groups the nonempty pieces of a polytopic region into classes of pieces
/// that touch or overlap (transitively).
std::vector<std::vector<HPolytope>> connected_components(const Region& r);

/// Ordered vertex list (counter-clockwise, starting at the lowest-x then
/// lowest-y vertex) of a bounded 2-D polytope.
std::vector<Vector> polygon_vertices(const HPolytope& p);

}  // namespace uvnet
