#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace storynet::csv {

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields may contain separators, doubled quotes and
// line breaks. Accepts both LF and CRLF record terminators.
class Reader {
 public:
  explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}

  // Reads the next record. Returns false at end of input.
  bool next(Row& row);

  // Line number (1-based) where the last returned record started.
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

std::vector<Row> read_all(std::istream& in, char sep = ',');

// Quotes a field only when it contains the separator, a quote or a line break.
std::string escape(std::string_view field, char sep = ',');

void write_row(std::ostream& out, const Row& row, char sep = ',');

// Shortest round-trip representation of a double, so emitted tables are
// byte-reproducible and re-read without loss.
std::string format_double(double v);

}  // namespace storynet::csv
