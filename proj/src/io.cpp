#include "uvnet/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace uvnet {

namespace {

std::string trim(const std::string& s) {
  const auto hash = s.find('#');
  const std::string body = hash == std::string::npos ? s : s.substr(0, hash);
  const auto first = body.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = body.find_last_not_of(" \t\r");
  return body.substr(first, last - first + 1);
}

std::string join_numbers(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_number(v(i));
  }
  return out;
}

Vector read_vector(LineReader& reader, std::size_t expected, const std::string& what) {
  const std::string line = reader.expect(what);
  const auto values = parse_numbers(line, reader.line_number());
  if (expected != 0 && values.size() != expected) {
    throw ParseError(reader.line_number(), what + ": expected " + std::to_string(expected) + " values, got " +
                                               std::to_string(values.size()));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

HPolytope read_polytope_body(LineReader& reader, std::size_t n, std::size_t m) {
  Matrix a(m, n);
  Vector b(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector row = read_vector(reader, n + 1, "polytope row");
    a.row(i) = row.head(n).transpose();
    b(i) = row(n);
  }
  return HPolytope(a, b);
}

void write_polytope(std::ostream& out, const HPolytope& p) {
  out << "polytope n=" << p.dim() << " rows=" << p.rows() << '\n';
  for (std::size_t i = 0; i < p.rows(); ++i) {
    Vector row(p.dim() + 1);
    row << p.a().row(i).transpose(), p.b()(i);
    out << join_numbers(row) << '\n';
  }
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

const std::string* LineReader::peek() {
  if (buffered_) return &*buffered_;
  std::string raw;
  std::size_t line = line_;
  while (std::getline(in_, raw)) {
    ++line;
    std::string t = trim(raw);
    if (t.empty()) continue;
    buffered_ = std::move(t);
    buffered_line_ = line;
    // Lines skipped while peeking still count towards the position.
    skipped_to_ = line;
    return &*buffered_;
  }
  skipped_to_ = line;
  return nullptr;
}

std::optional<std::string> LineReader::next() {
  if (!peek()) {
    line_ = skipped_to_;
    return std::nullopt;
  }
  line_ = buffered_line_;
  std::optional<std::string> out = std::move(buffered_);
  buffered_.reset();
  return out;
}

std::string LineReader::expect(const std::string& what) {
  auto line = next();
  if (!line) throw ParseError(line_, "unexpected end of input, expected " + what);
  return *line;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& token, std::size_t line) {
  std::string_view s = token;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "invalid number '" + token + "'");
  }
  return v;
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no) {
  std::vector<double> out;
  for (const auto& w : split_words(line)) out.push_back(parse_number(w, line_no));
  return out;
}

std::size_t header_count(const std::vector<std::string>& words, const std::string& key, std::size_t line) {
  const std::string prefix = key + "=";
  for (const auto& w : words) {
    if (w.rfind(prefix, 0) != 0) continue;
    const std::string value = w.substr(prefix.size());
    std::size_t out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      throw ParseError(line, "invalid count in '" + w + "'");
    }
    return out;
  }
  throw ParseError(line, "missing '" + prefix + "<count>'");
}

Region read_region(LineReader& reader) {
  const std::string header = reader.expect("region header");
  const std::size_t line = reader.line_number();
  const auto words = split_words(header);
  const std::string& kind = words.front();
  if (kind == "polytope") {
    const std::size_t n = header_count(words, "n", line);
    const std::size_t m = header_count(words, "rows", line);
    if (n == 0) throw ParseError(line, "polytope dimension must be positive");
    return Region::polytope(read_polytope_body(reader, n, m));
  }
  if (kind == "box") {
    const Vector lo = read_vector(reader, 0, "box lower bounds");
    const Vector hi = read_vector(reader, static_cast<std::size_t>(lo.size()), "box upper bounds");
    return Region::box(lo, hi);
  }
  if (kind == "union") {
    const std::size_t k = header_count(words, "k", line);
    std::vector<HPolytope> pieces;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::string ph = reader.expect("union piece");
      const auto pw = split_words(ph);
      if (pw.front() != "polytope") throw ParseError(reader.line_number(), "union pieces must be polytope blocks");
      const std::size_t n = header_count(pw, "n", reader.line_number());
      const std::size_t m = header_count(pw, "rows", reader.line_number());
      if (i > 0 && n != dim) throw ParseError(reader.line_number(), "union pieces must share a dimension");
      dim = n;
      pieces.push_back(read_polytope_body(reader, n, m));
    }
    if (k == 0) throw ParseError(line, "union needs at least one piece");
    return Region::union_of(std::move(pieces), dim);
  }
  if (kind == "ellipsoid") {
    const Vector center = read_vector(reader, 0, "ellipsoid center");
    const auto n = static_cast<std::size_t>(center.size());
    Matrix shape(n, n);
    for (std::size_t i = 0; i < n; ++i) shape.row(i) = read_vector(reader, n, "ellipsoid shape row").transpose();
    const Vector level = read_vector(reader, 1, "ellipsoid level");
    try {
      return Region::ellipsoid(Ellipsoid(center, shape, level(0)));
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
  }
  if (kind == "empty" || kind == "full") {
    const std::size_t n = header_count(words, "n", line);
    return kind == "empty" ? Region::empty(n) : Region::full(n);
  }
  throw ParseError(line, "unknown region kind '" + kind + "'");
}

Region parse_region(const std::string& text) {
  std::istringstream in(text);
  LineReader reader(in);
  return read_region(reader);
}

void write_region(std::ostream& out, const Region& r) {
  if (r.is<EmptySet>()) {
    out << "empty n=" << r.dim() << '\n';
  } else if (r.is<FullSpace>()) {
    out << "full n=" << r.dim() << '\n';
  } else if (const auto* b = r.as<Box>()) {
    out << "box\n" << join_numbers(b->lower) << '\n' << join_numbers(b->upper) << '\n';
  } else if (const auto* p = r.as<HPolytope>()) {
    write_polytope(out, *p);
  } else if (const auto* u = r.as<PolytopeUnion>()) {
    out << "union k=" << u->pieces.size() << '\n';
    for (const auto& piece : u->pieces) write_polytope(out, piece);
  } else if (const auto* e = r.as<Ellipsoid>()) {
    out << "ellipsoid\n" << join_numbers(e->center) << '\n';
    for (Eigen::Index i = 0; i < e->shape.rows(); ++i) out << join_numbers(e->shape.row(i).transpose()) << '\n';
    out << format_number(e->level) << '\n';
  } else {
    throw UnsupportedRepresentation("write_region: membership oracles cannot be serialized");
  }
}

std::string format_region(const Region& r) {
  std::ostringstream out;
  write_region(out, r);
  return out.str();
}

}  // namespace uvnet
