#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uvnet/region.hpp"

namespace uvnet {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads logical lines: `#` starts a comment, blank lines are skipped and
/// surrounding whitespace is trimmed.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next logical line without consuming it.
  const std::string* peek();
  std::optional<std::string> next();
  /// Next logical line; raises ParseError mentioning `what` at end of input.
  std::string expect(const std::string& what);
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::optional<std::string> buffered_;
  std::size_t line_ = 0;
  std::size_t buffered_line_ = 0;
  std::size_t skipped_to_ = 0;
};

/// Locale-independent shortest round-trip decimal; `inf`/`-inf` for infinities.
std::string format_number(double v);
double parse_number(const std::string& token, std::size_t line);
std::vector<std::string> split_words(const std::string& line);
std::vector<double> parse_numbers(const std::string& line, std::size_t line_no);
/// Value of a `key=value` token among the words of a header line.
std::size_t header_count(const std::vector<std::string>& words, const std::string& key, std::size_t line);

/// Reads one region block (polytope, box, union, ellipsoid, empty, full).
Region read_region(LineReader& reader);
Region parse_region(const std::string& text);

void write_region(std::ostream& out, const Region& r);
std::string format_region(const Region& r);

}  // namespace uvnet
