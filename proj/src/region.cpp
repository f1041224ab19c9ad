#include "uvnet/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "uvnet/lp.hpp"
#include "uvnet/sampling.hpp"

namespace uvnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroCoeff = 1e-12;

void require_dim(const Region& r, const Vector& x, const char* what) {
  if (static_cast<std::size_t>(x.size()) != r.dim()) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(r.dim()) + ", got " +
                            std::to_string(x.size()));
  }
}

void require_same_dim(const Region& r1, const Region& r2, const char* what) {
  if (r1.dim() != r2.dim()) {
    throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(r1.dim()) + " and " +
                            std::to_string(r2.dim()) + " differ");
  }
}

bool is_box_like(const Region& r) { return r.is<Box>() || r.is<FullSpace>(); }

Box as_box(const Region& r) {
  if (const auto* b = r.as<Box>()) return *b;
  return Box::unbounded(r.dim());
}

Vector select(const Vector& v, const IndexList& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

Matrix select_cols(const Matrix& m, const IndexList& idx) {
  Matrix out(m.rows(), idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = m.col(idx[k]);
  return out;
}

Matrix select_block(const Matrix& m, const IndexList& rows, const IndexList& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

void validate_indices(const IndexList& idx, std::size_t dim, const char* what) {
  std::vector<bool> seen(dim, false);
  for (std::size_t i : idx) {
    if (i >= dim) throw Error(std::string(what) + ": index " + std::to_string(i) + " out of range");
    if (seen[i]) throw Error(std::string(what) + ": repeated index " + std::to_string(i));
    seen[i] = true;
  }
}

bool polytope_empty(const HPolytope& p) {
  return solve_lp(Vector::Zero(p.dim()), p).status == LpStatus::Infeasible;
}

std::optional<double> polytope_max(const HPolytope& p, const Vector& c) {
  const LpResult r = solve_lp(-c, p);
  switch (r.status) {
    case LpStatus::Infeasible:
      return std::nullopt;
    case LpStatus::Unbounded:
      return kInf;
    case LpStatus::Optimal:
      break;
  }
  return -r.value;
}

// Scales each row to unit infinity norm, drops coefficient-free rows and
// keeps the tightest copy of duplicated rows. Returns nullopt if a
// coefficient-free row is violated.
std::optional<HPolytope> normalize_rows(const HPolytope& p) {
  struct Row {
    Eigen::RowVectorXd a;
    double b;
  };
  std::vector<Row> rows;
  rows.reserve(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double s = p.a().row(i).cwiseAbs().maxCoeff();
    if (s <= kZeroCoeff) {
      if (p.b()(i) < -kFeasTol) return std::nullopt;
      continue;
    }
    Row r{p.a().row(i) / s, p.b()(i) / s};
    bool merged = false;
    for (auto& q : rows) {
      if ((q.a - r.a).cwiseAbs().maxCoeff() <= kZeroCoeff) {
        q.b = std::min(q.b, r.b);
        merged = true;
        break;
      }
    }
    if (!merged) rows.push_back(std::move(r));
  }
  Matrix a(rows.size(), p.dim());
  Vector b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.row(i) = rows[i].a;
    b(i) = rows[i].b;
  }
  return HPolytope(a, b);
}

HPolytope take_rows(const HPolytope& p, const std::vector<bool>& keep) {
  const auto count = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), true));
  Matrix a(count, p.dim());
  Vector b(count);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    if (!keep[i]) continue;
    a.row(k) = p.a().row(i);
    b(k++) = p.b()(i);
  }
  return HPolytope(a, b);
}

// Eliminates column `col` by pairing every positive row with every negative
// row; the column itself is removed from the result.
HPolytope fourier_motzkin_step(const HPolytope& p, std::size_t col) {
  std::vector<std::size_t> pos, neg, zero;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double v = p.a()(i, col);
    if (v > kZeroCoeff) pos.push_back(i);
    else if (v < -kZeroCoeff) neg.push_back(i);
    else zero.push_back(i);
  }
  const std::size_t n = p.dim();
  IndexList rest;
  for (std::size_t j = 0; j < n; ++j)
    if (j != col) rest.push_back(j);

  Matrix a(zero.size() + pos.size() * neg.size(), n - 1);
  Vector b(a.rows());
  Eigen::Index k = 0;
  for (std::size_t i : zero) {
    for (std::size_t j = 0; j < rest.size(); ++j) a(k, j) = p.a()(i, rest[j]);
    b(k++) = p.b()(i);
  }
  for (std::size_t ip : pos) {
    for (std::size_t in : neg) {
      const double wp = -p.a()(in, col);
      const double wn = p.a()(ip, col);
      for (std::size_t j = 0; j < rest.size(); ++j) a(k, j) = wp * p.a()(ip, rest[j]) + wn * p.a()(in, rest[j]);
      b(k++) = wp * p.b()(ip) + wn * p.b()(in);
    }
  }
  return HPolytope(a, b);
}

Vector solve_spd(const Matrix& m, const Vector& rhs) { return m.llt().solve(rhs); }

Region oracle_intersection(const Region& r1, const Region& r2) {
  const auto b1 = bounding_box(r1);
  const auto b2 = bounding_box(r2);
  if (!b1 || !b2) return Region::empty(r1.dim());
  Box bounds(b1->lower.cwiseMax(b2->lower), b1->upper.cwiseMin(b2->upper));
  if ((bounds.lower.array() > bounds.upper.array() + kFeasTol).any()) return Region::empty(r1.dim());
  bounds.upper = bounds.upper.cwiseMax(bounds.lower);
  return Region::oracle([r1, r2](const Vector& x) { return contains(r1, x) && contains(r2, x); }, bounds);
}

Region oracle_product(const Region& r1, const Region& r2) {
  const auto b1 = bounding_box(r1);
  const auto b2 = bounding_box(r2);
  const std::size_t d1 = r1.dim();
  const std::size_t d2 = r2.dim();
  Box bounds(Vector(d1 + d2), Vector(d1 + d2));
  bounds.lower << b1->lower, b2->lower;
  bounds.upper << b1->upper, b2->upper;
  return Region::oracle(
      [r1, r2, d1, d2](const Vector& x) { return contains(r1, x.head(d1)) && contains(r2, x.tail(d2)); }, bounds);
}

HPolytope block_diagonal(const HPolytope& p, const HPolytope& q) {
  Matrix a = Matrix::Zero(p.rows() + q.rows(), p.dim() + q.dim());
  Vector b(p.rows() + q.rows());
  a.topLeftCorner(p.rows(), p.dim()) = p.a();
  a.bottomRightCorner(q.rows(), q.dim()) = q.a();
  b << p.b(), q.b();
  return HPolytope(a, b);
}

// Piece-by-piece containment of a polytopic region in a single convex
// polytope, decided by one LP per row of the container.
bool polytopic_in_polytope(const Region& r1, const HPolytope& p) {
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const auto m = linear_max(r1, p.a().row(i).transpose());
    if (!m) return true;
    if (*m > p.b()(i) + kFeasTol) return false;
  }
  return true;
}

Verdict sampled_subset(const Region& r1, const Region& r2, const SampleOptions& opts) {
  for (const Vector& x : sample_points(r1, opts)) {
    if (!contains(r2, x)) return Verdict::False;
  }
  return Verdict::SampledTrue;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::False:
      return "false";
    case Verdict::True:
      return "true";
    case Verdict::SampledTrue:
      return "sampled-true";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Value types

Box::Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw DimensionMismatch("Box: bound lengths differ");
}

bool Box::bounded() const { return lower.allFinite() && upper.allFinite(); }

Box Box::unbounded(std::size_t dim) {
  return Box(Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf));
}

HPolytope::HPolytope(std::size_t dim) : dim_(dim), a_(0, dim), b_(0) {}

HPolytope::HPolytope(Matrix a, Vector b) : dim_(static_cast<std::size_t>(a.cols())), a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size()) throw DimensionMismatch("HPolytope: row count of A differs from length of b");
}

HPolytope HPolytope::from_box(const Box& box) {
  const std::size_t n = box.dim();
  std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(box.upper(i))) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r(i) = 1.0;
      rows.emplace_back(r, box.upper(i));
    }
    if (std::isfinite(box.lower(i))) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r(i) = -1.0;
      rows.emplace_back(r, -box.lower(i));
    }
  }
  Matrix a(rows.size(), n);
  Vector b(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    a.row(k) = rows[k].first;
    b(k) = rows[k].second;
  }
  return HPolytope(a, b);
}

HPolytope HPolytope::stacked(const HPolytope& other) const {
  if (other.dim() != dim_) throw DimensionMismatch("HPolytope::stacked: dimensions differ");
  Matrix a(rows() + other.rows(), dim_);
  Vector b(rows() + other.rows());
  a << a_, other.a_;
  b << b_, other.b_;
  return HPolytope(a, b);
}

Ellipsoid::Ellipsoid(Vector c, Matrix q, double eta) : center(std::move(c)), shape(std::move(q)), level(eta) {
  const auto n = center.size();
  if (shape.rows() != n || shape.cols() != n) throw DimensionMismatch("Ellipsoid: shape must be n x n");
  if ((shape - shape.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw Error("Ellipsoid: shape is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(shape);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw Error("Ellipsoid: shape is not positive definite");
  if (!(level > 0.0)) throw Error("Ellipsoid: level must be positive");
}

double Ellipsoid::distance(const Vector& x) const {
  const Vector d = x - center;
  return d.dot(solve_spd(shape, d));
}

// ---------------------------------------------------------------------------
// Region factories

Region Region::empty(std::size_t dim) { return Region(dim, EmptySet{}); }
Region Region::full(std::size_t dim) { return Region(dim, FullSpace{}); }

Region Region::box(Box b) {
  const std::size_t n = b.dim();
  if ((b.lower.array() > b.upper.array() + kFeasTol).any()) return empty(n);
  b.upper = b.upper.cwiseMax(b.lower);
  if ((b.lower.array() == -kInf).all() && (b.upper.array() == kInf).all()) return full(n);
  return Region(n, std::move(b));
}

Region Region::box(const Vector& lo, const Vector& hi) { return box(Box(lo, hi)); }

Region Region::interval(double lo, double hi) {
  return box(Vector::Constant(1, lo), Vector::Constant(1, hi));
}

Region Region::polytope(HPolytope p) {
  const std::size_t n = p.dim();
  return Region(n, std::move(p));
}

Region Region::polytope(Matrix a, Vector b) { return polytope(HPolytope(std::move(a), std::move(b))); }

Region Region::union_of(std::vector<HPolytope> pieces, std::size_t dim) {
  for (const auto& p : pieces) {
    if (p.dim() != dim) throw DimensionMismatch("union: piece dimension differs from union dimension");
  }
  if (pieces.empty()) return empty(dim);
  if (pieces.size() == 1) return polytope(std::move(pieces.front()));
  return Region(dim, PolytopeUnion{std::move(pieces)});
}

Region Region::ellipsoid(Ellipsoid e) {
  const std::size_t n = e.dim();
  return Region(n, std::move(e));
}

Region Region::oracle(std::function<bool(const Vector&)> predicate, Box bounds) {
  const std::size_t n = bounds.dim();
  return Region(n, MembershipOracle{std::move(predicate), std::move(bounds)});
}

bool Region::is_polytopic() const {
  return is<EmptySet>() || is<FullSpace>() || is<Box>() || is<HPolytope>() || is<PolytopeUnion>();
}

bool Region::is_convex_polytopic() const { return is_polytopic() && !is<PolytopeUnion>(); }

std::string Region::kind() const {
  struct Visitor {
    std::string operator()(const EmptySet&) const { return "empty"; }
    std::string operator()(const FullSpace&) const { return "full"; }
    std::string operator()(const Box&) const { return "box"; }
    std::string operator()(const HPolytope&) const { return "polytope"; }
    std::string operator()(const PolytopeUnion&) const { return "union"; }
    std::string operator()(const Ellipsoid&) const { return "ellipsoid"; }
    std::string operator()(const MembershipOracle&) const { return "oracle"; }
  };
  return std::visit(Visitor{}, body_);
}

// ---------------------------------------------------------------------------
// Membership and emptiness

bool contains(const Region& r, const Vector& x) {
  require_dim(r, x, "contains");
  if (r.is<EmptySet>()) return false;
  if (r.is<FullSpace>()) return true;
  if (const auto* b = r.as<Box>()) {
    return ((x - b->lower).array() >= -kFeasTol).all() && ((b->upper - x).array() >= -kFeasTol).all();
  }
  if (const auto* p = r.as<HPolytope>()) {
    return p->rows() == 0 || (p->a() * x - p->b()).maxCoeff() <= kFeasTol;
  }
  if (const auto* u = r.as<PolytopeUnion>()) {
    return std::any_of(u->pieces.begin(), u->pieces.end(),
                       [&](const HPolytope& p) { return contains(Region::polytope(p), x); });
  }
  if (const auto* e = r.as<Ellipsoid>()) return e->distance(x) <= e->level + kFeasTol;
  return r.as<MembershipOracle>()->predicate(x);
}

Verdict is_empty(const Region& r, const SampleOptions& opts) {
  if (r.is<EmptySet>()) return Verdict::True;
  if (r.is<FullSpace>() || r.is<Box>() || r.is<Ellipsoid>()) return Verdict::False;
  if (const auto* p = r.as<HPolytope>()) return verdict_from(polytope_empty(*p));
  if (const auto* u = r.as<PolytopeUnion>()) {
    return verdict_from(std::all_of(u->pieces.begin(), u->pieces.end(), polytope_empty));
  }
  return sample_points(r, opts).empty() ? Verdict::SampledTrue : Verdict::False;
}

// ---------------------------------------------------------------------------
// Set algebra

HPolytope remove_redundancy(const HPolytope& p) {
  auto normalized = normalize_rows(p);
  if (!normalized) throw Error("remove_redundancy: polytope is empty");
  HPolytope cur = *normalized;
  std::vector<bool> keep(cur.rows(), true);
  for (std::size_t k = 0; k < cur.rows(); ++k) {
    keep[k] = false;
    const HPolytope others = take_rows(cur, keep);
    const auto m = polytope_max(others, cur.a().row(k).transpose());
    keep[k] = !(m && *m <= cur.b()(k) + kFeasTol);
  }
  return take_rows(cur, keep);
}

Region project_polytope(const HPolytope& p, const IndexList& keep) {
  validate_indices(keep, p.dim(), "project");
  if (keep.empty()) throw Error("project: keep set is empty");
  if (polytope_empty(p)) return Region::empty(keep.size());

  HPolytope cur = remove_redundancy(p);
  IndexList coords(p.dim());
  std::iota(coords.begin(), coords.end(), 0);
  auto kept = [&](std::size_t original) { return std::find(keep.begin(), keep.end(), original) != keep.end(); };

  for (;;) {
    // Greedy order: the column whose elimination creates the fewest rows.
    std::size_t best_col = coords.size();
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (kept(coords[j])) continue;
      std::size_t pos = 0, neg = 0;
      for (std::size_t i = 0; i < cur.rows(); ++i) {
        pos += cur.a()(i, j) > kZeroCoeff ? 1 : 0;
        neg += cur.a()(i, j) < -kZeroCoeff ? 1 : 0;
      }
      if (pos * neg < best_cost) {
        best_cost = pos * neg;
        best_col = j;
      }
    }
    if (best_col == coords.size()) break;
    cur = fourier_motzkin_step(cur, best_col);
    coords.erase(coords.begin() + static_cast<std::ptrdiff_t>(best_col));
    if (cur.rows() > 0) cur = remove_redundancy(cur);
  }

  IndexList order;
  for (std::size_t k : keep) {
    order.push_back(static_cast<std::size_t>(std::find(coords.begin(), coords.end(), k) - coords.begin()));
  }
  if (cur.rows() == 0) return Region::full(keep.size());
  return Region::polytope(select_cols(cur.a(), order), cur.b());
}

Region project(const Region& r, const IndexList& keep) {
  validate_indices(keep, r.dim(), "project");
  if (keep.empty()) throw Error("project: keep set is empty");
  const std::size_t k = keep.size();
  if (r.is<EmptySet>()) return Region::empty(k);
  if (r.is<FullSpace>()) return Region::full(k);
  if (const auto* b = r.as<Box>()) return Region::box(select(b->lower, keep), select(b->upper, keep));
  if (const auto* p = r.as<HPolytope>()) return project_polytope(*p, keep);
  if (const auto* u = r.as<PolytopeUnion>()) {
    std::vector<HPolytope> out;
    for (const auto& piece : u->pieces) {
      const Region proj = project_polytope(piece, keep);
      if (proj.is<FullSpace>()) return proj;
      if (const auto* q = proj.as<HPolytope>()) out.push_back(*q);
    }
    return Region::union_of(std::move(out), k);
  }
  if (const auto* e = r.as<Ellipsoid>()) {
    return Region::ellipsoid(Ellipsoid(select(e->center, keep), select_block(e->shape, keep, keep), e->level));
  }
  throw UnsupportedRepresentation("project: membership oracles cannot be projected");
}

Region intersect(const Region& r1, const Region& r2) {
  require_same_dim(r1, r2, "intersect");
  const std::size_t n = r1.dim();
  if (r1.is<EmptySet>() || r2.is<EmptySet>()) return Region::empty(n);
  if (r1.is<FullSpace>()) return r2;
  if (r2.is<FullSpace>()) return r1;
  if (r1.is<Box>() && r2.is<Box>()) {
    const Box& a = *r1.as<Box>();
    const Box& b = *r2.as<Box>();
    return Region::box(a.lower.cwiseMax(b.lower), a.upper.cwiseMin(b.upper));
  }
  if (!r1.is_polytopic() || !r2.is_polytopic()) return oracle_intersection(r1, r2);
  if (r1.is<PolytopeUnion>() || r2.is<PolytopeUnion>()) {
    std::vector<HPolytope> out;
    for (const auto& p : polytope_pieces(r1)) {
      for (const auto& q : polytope_pieces(r2)) {
        HPolytope s = p.stacked(q);
        if (!polytope_empty(s)) out.push_back(std::move(s));
      }
    }
    return Region::union_of(std::move(out), n);
  }
  return Region::polytope(polytope_pieces(r1).front().stacked(polytope_pieces(r2).front()));
}

Region product(const Region& r1, const Region& r2) {
  const std::size_t n = r1.dim() + r2.dim();
  if (r1.is<EmptySet>() || r2.is<EmptySet>()) return Region::empty(n);
  if (r1.is<FullSpace>() && r2.is<FullSpace>()) return Region::full(n);
  if (is_box_like(r1) && is_box_like(r2)) {
    const Box a = as_box(r1);
    const Box b = as_box(r2);
    Vector lo(n), hi(n);
    lo << a.lower, b.lower;
    hi << a.upper, b.upper;
    return Region::box(lo, hi);
  }
  if (!r1.is_polytopic() || !r2.is_polytopic()) return oracle_product(r1, r2);
  std::vector<HPolytope> out;
  for (const auto& p : polytope_pieces(r1)) {
    for (const auto& q : polytope_pieces(r2)) out.push_back(block_diagonal(p, q));
  }
  return Region::union_of(std::move(out), n);
}

namespace {

// Substitution on a single polytope; nullopt when a row with no remaining
// coefficients is violated.
std::optional<HPolytope> slice_polytope(const HPolytope& p, const FixedValues& fixed, const IndexList& rest) {
  Vector b = p.b();
  for (const auto& [idx, value] : fixed) b -= p.a().col(idx) * value;
  const Matrix a = select_cols(p.a(), rest);
  std::vector<bool> keep(p.rows(), true);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    if (a.cols() == 0 || a.row(i).cwiseAbs().maxCoeff() <= 1e-14) {
      if (b(i) < -kFeasTol) return std::nullopt;
      keep[i] = false;
    }
  }
  return take_rows(HPolytope(a, b), keep);
}

}  // namespace

Region slice(const Region& r, const FixedValues& fixed) {
  for (const auto& [idx, value] : fixed) {
    if (idx >= r.dim()) throw Error("slice: index " + std::to_string(idx) + " out of range");
  }
  IndexList rest;
  for (std::size_t j = 0; j < r.dim(); ++j)
    if (!fixed.count(j)) rest.push_back(j);
  const std::size_t k = rest.size();

  if (r.is<EmptySet>()) return Region::empty(k);
  if (r.is<FullSpace>()) return Region::full(k);
  if (const auto* b = r.as<Box>()) {
    for (const auto& [idx, value] : fixed) {
      if (value < b->lower(idx) - kFeasTol || value > b->upper(idx) + kFeasTol) return Region::empty(k);
    }
    if (k == 0) return Region::full(0);
    return Region::box(select(b->lower, rest), select(b->upper, rest));
  }
  if (const auto* p = r.as<HPolytope>()) {
    auto s = slice_polytope(*p, fixed, rest);
    if (!s) return Region::empty(k);
    if (s->rows() == 0) return Region::full(k);
    return Region::polytope(std::move(*s));
  }
  if (const auto* u = r.as<PolytopeUnion>()) {
    std::vector<HPolytope> out;
    for (const auto& piece : u->pieces) {
      auto s = slice_polytope(piece, fixed, rest);
      if (!s) continue;
      if (s->rows() == 0) return Region::full(k);
      out.push_back(std::move(*s));
    }
    return Region::union_of(std::move(out), k);
  }
  if (const auto* e = r.as<Ellipsoid>()) {
    IndexList fixed_idx;
    Vector offset(fixed.size());
    for (const auto& [idx, value] : fixed) {
      offset(static_cast<Eigen::Index>(fixed_idx.size())) = value - e->center(idx);
      fixed_idx.push_back(idx);
    }
    if (k == 0) {
      Vector x(r.dim());
      for (const auto& [idx, value] : fixed) x(idx) = value;
      return contains(r, x) ? Region::full(0) : Region::empty(0);
    }
    const Matrix precision = e->shape.inverse();
    const Matrix p_uu = select_block(precision, rest, rest);
    const Matrix p_uf = select_block(precision, rest, fixed_idx);
    const Matrix q_ff = select_block(e->shape, fixed_idx, fixed_idx);
    const double level = fixed_idx.empty() ? e->level : e->level - offset.dot(solve_spd(q_ff, offset));
    const Vector center = select(e->center, rest) - p_uu.llt().solve(p_uf * offset);
    if (level < -kFeasTol) return Region::empty(k);
    if (level <= 0.0) return Region::box(center, center);
    Matrix shape = p_uu.inverse();
    shape = 0.5 * (shape + shape.transpose());
    return Region::ellipsoid(Ellipsoid(center, shape, level));
  }
  const auto& o = *r.as<MembershipOracle>();
  for (const auto& [idx, value] : fixed) {
    if (value < o.bounds.lower(idx) - kFeasTol || value > o.bounds.upper(idx) + kFeasTol) return Region::empty(k);
  }
  const std::size_t n = r.dim();
  auto predicate = [pred = o.predicate, fixed, rest, n](const Vector& y) {
    Vector x(n);
    for (const auto& [idx, value] : fixed) x(idx) = value;
    for (std::size_t j = 0; j < rest.size(); ++j) x(rest[j]) = y(j);
    return pred(x);
  };
  return Region::oracle(predicate, Box(select(o.bounds.lower, rest), select(o.bounds.upper, rest)));
}

Region permute(const Region& r, const IndexList& order) {
  if (order.size() != r.dim()) throw Error("permute: order must list every coordinate");
  validate_indices(order, r.dim(), "permute");
  if (r.is<EmptySet>() || r.is<FullSpace>()) return r;
  if (const auto* b = r.as<Box>()) return Region::box(select(b->lower, order), select(b->upper, order));
  if (const auto* p = r.as<HPolytope>()) return Region::polytope(select_cols(p->a(), order), p->b());
  if (const auto* u = r.as<PolytopeUnion>()) {
    std::vector<HPolytope> out;
    for (const auto& piece : u->pieces) out.emplace_back(select_cols(piece.a(), order), piece.b());
    return Region::union_of(std::move(out), r.dim());
  }
  if (const auto* e = r.as<Ellipsoid>()) {
    return Region::ellipsoid(Ellipsoid(select(e->center, order), select_block(e->shape, order, order), e->level));
  }
  const auto& o = *r.as<MembershipOracle>();
  auto predicate = [pred = o.predicate, order](const Vector& y) {
    Vector x(y.size());
    for (std::size_t j = 0; j < order.size(); ++j) x(order[j]) = y(j);
    return pred(x);
  };
  return Region::oracle(predicate, Box(select(o.bounds.lower, order), select(o.bounds.upper, order)));
}

Region embed(const Region& r, std::size_t dim, const IndexList& targets) {
  if (targets.size() != r.dim()) throw Error("embed: one target per coordinate required");
  validate_indices(targets, dim, "embed");
  if (r.is<EmptySet>()) return Region::empty(dim);
  if (r.is<FullSpace>()) return Region::full(dim);
  if (const auto* b = r.as<Box>()) {
    Box out = Box::unbounded(dim);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      out.lower(targets[k]) = b->lower(k);
      out.upper(targets[k]) = b->upper(k);
    }
    return Region::box(out);
  }
  auto lift = [&](const HPolytope& p) {
    Matrix a = Matrix::Zero(p.rows(), dim);
    for (std::size_t k = 0; k < targets.size(); ++k) a.col(targets[k]) = p.a().col(k);
    return HPolytope(a, p.b());
  };
  if (const auto* p = r.as<HPolytope>()) return Region::polytope(lift(*p));
  if (const auto* u = r.as<PolytopeUnion>()) {
    std::vector<HPolytope> out;
    for (const auto& piece : u->pieces) out.push_back(lift(piece));
    return Region::union_of(std::move(out), dim);
  }
  const auto inner = bounding_box(r);
  Box bounds = Box::unbounded(dim);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    bounds.lower(targets[k]) = inner->lower(k);
    bounds.upper(targets[k]) = inner->upper(k);
  }
  return Region::oracle([r, targets](const Vector& x) { return contains(r, select(x, targets)); }, bounds);
}

// ---------------------------------------------------------------------------
// Linear functionals and inclusion

std::optional<double> linear_max(const Region& r, const Vector& c) {
  require_dim(r, c, "linear_max");
  if (r.is<EmptySet>()) return std::nullopt;
  if (r.is<FullSpace>()) return c.cwiseAbs().maxCoeff() > 0.0 ? kInf : 0.0;
  if (const auto* b = r.as<Box>()) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (c(i) > 0.0) total += c(i) * b->upper(i);
      else if (c(i) < 0.0) total += c(i) * b->lower(i);
    }
    return total;
  }
  if (const auto* p = r.as<HPolytope>()) return polytope_max(*p, c);
  if (const auto* u = r.as<PolytopeUnion>()) {
    std::optional<double> best;
    for (const auto& piece : u->pieces) {
      const auto m = polytope_max(piece, c);
      if (m && (!best || *m > *best)) best = m;
    }
    return best;
  }
  if (const auto* e = r.as<Ellipsoid>()) return c.dot(e->center) + std::sqrt(e->level * c.dot(e->shape * c));
  throw UnsupportedRepresentation("linear_max: membership oracles have no linear programming form");
}

Verdict is_subset(const Region& r1, const Region& r2, const SampleOptions& opts) {
  require_same_dim(r1, r2, "is_subset");
  if (r1.is<EmptySet>() || r2.is<FullSpace>()) return Verdict::True;
  if (r2.is<EmptySet>()) return is_empty(r1, opts);
  if (r1.is<MembershipOracle>()) return sampled_subset(r1, r2, opts);
  if (r2.is<Box>() || r2.is<HPolytope>()) {
    return verdict_from(polytopic_in_polytope(r1, polytope_pieces(r2).front()));
  }
  if (r2.is<PolytopeUnion>() && r1.is_polytopic()) {
    // Sufficient exact test: every piece of r1 lies inside one piece of r2.
    const auto& targets = r2.as<PolytopeUnion>()->pieces;
    bool covered = true;
    for (const auto& piece : polytope_pieces(r1)) {
      const Region pr = Region::polytope(piece);
      if (polytope_empty(piece)) continue;
      if (!std::any_of(targets.begin(), targets.end(),
                       [&](const HPolytope& t) { return polytopic_in_polytope(pr, t); })) {
        covered = false;
        break;
      }
    }
    if (covered) return Verdict::True;
  }
  return sampled_subset(r1, r2, opts);
}

Verdict regions_equal(const Region& r1, const Region& r2, const SampleOptions& opts) {
  const Verdict forward = is_subset(r1, r2, opts);
  if (forward == Verdict::False) return forward;
  return forward && is_subset(r2, r1, opts);
}

// ---------------------------------------------------------------------------
// Utilities

std::optional<Box> bounding_box(const Region& r) {
  const std::size_t n = r.dim();
  if (r.is<EmptySet>()) return std::nullopt;
  if (r.is<FullSpace>()) return Box::unbounded(n);
  if (const auto* b = r.as<Box>()) return *b;
  if (const auto* e = r.as<Ellipsoid>()) {
    const Vector half = (e->level * e->shape.diagonal()).cwiseSqrt();
    return Box(e->center - half, e->center + half);
  }
  if (const auto* o = r.as<MembershipOracle>()) return o->bounds;
  std::optional<Box> hull;
  for (const auto& piece : polytope_pieces(r)) {
    Box b{Vector(n), Vector(n)};
    bool feasible = true;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      Vector c = Vector::Zero(n);
      c(i) = 1.0;
      const auto hi = polytope_max(piece, c);
      const auto lo = polytope_max(piece, -c);
      if (!hi || !lo) {
        feasible = false;
        break;
      }
      b.upper(i) = *hi;
      b.lower(i) = -*lo;
    }
    if (!feasible) continue;
    if (!hull) hull = b;
    else hull = Box(hull->lower.cwiseMin(b.lower), hull->upper.cwiseMax(b.upper));
  }
  return hull;
}

std::vector<HPolytope> polytope_pieces(const Region& r) {
  if (r.is<EmptySet>()) return {};
  if (r.is<FullSpace>()) return {HPolytope(r.dim())};
  if (const auto* b = r.as<Box>()) return {HPolytope::from_box(*b)};
  if (const auto* p = r.as<HPolytope>()) return {*p};
  if (const auto* u = r.as<PolytopeUnion>()) return u->pieces;
  throw UnsupportedRepresentation("polytope_pieces: region of kind " + r.kind() + " is not polytopic");
}

std::vector<std::vector<HPolytope>> connected_components(const Region& r) {
  std::vector<HPolytope> pieces;
  for (auto& p : polytope_pieces(r))
    if (!polytope_empty(p)) pieces.push_back(std::move(p));
  std::vector<std::size_t> parent(pieces.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      if (find(i) != find(j) && !polytope_empty(pieces[i].stacked(pieces[j]))) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<HPolytope>> groups;
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::size_t root = find(i);
    if (!slot.count(root)) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[slot[root]].push_back(pieces[i]);
  }
  return groups;
}

std::vector<Vector> polygon_vertices(const HPolytope& p) {
  if (p.dim() != 2) throw DimensionMismatch("polygon_vertices: polytope must be 2-D");
  std::vector<Vector> verts;
  const Region r = Region::polytope(p);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = i + 1; j < p.rows(); ++j) {
      Eigen::Matrix2d m;
      m << p.a()(i, 0), p.a()(i, 1), p.a()(j, 0), p.a()(j, 1);
      const double det = m.determinant();
      if (std::abs(det) < 1e-12) continue;
      const Vector v = m.inverse() * Eigen::Vector2d(p.b()(i), p.b()(j));
      if (!contains(r, v)) continue;
      const bool dup = std::any_of(verts.begin(), verts.end(),
                                   [&](const Vector& w) { return (w - v).cwiseAbs().maxCoeff() <= 1e-9; });
      if (!dup) verts.push_back(v);
    }
  }
  if (verts.empty()) return verts;
  Vector centroid = Vector::Zero(2);
  for (const auto& v : verts) centroid += v;
  centroid /= static_cast<double>(verts.size());
  std::sort(verts.begin(), verts.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a(1) - centroid(1), a(0) - centroid(0)) < std::atan2(b(1) - centroid(1), b(0) - centroid(0));
  });
  const auto first = std::min_element(verts.begin(), verts.end(), [](const Vector& a, const Vector& b) {
    if (std::abs(a(0) - b(0)) > 1e-12) return a(0) < b(0);
    return a(1) < b(1);
  });
  std::rotate(verts.begin(), first, verts.end());
  for (auto& v : verts) {
    for (Eigen::Index k = 0; k < 2; ++k)
      if (std::abs(v(k)) < 1e-12) v(k) = 0.0;
  }
  return verts;
}

}  // namespace uvnet
