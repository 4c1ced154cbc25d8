#include "storynet/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace storynet::csv {

bool Reader::next(Row& row) {
  row.clear();
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return false;

  record_line_ = line_;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    quoted = false;
    field_started = false;
  };

  while (c != std::char_traits<char>::eof()) {
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
    } else if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == '"') {
      throw CsvError(line_, "unexpected quote inside unquoted field");
    } else if (ch == sep_) {
      end_field();
    } else if (ch == '\r' && in_.peek() == '\n') {
      // CRLF, handled on the '\n'
    } else if (ch == '\n') {
      ++line_;
      end_field();
      return true;
    } else {
      field.push_back(ch);
      field_started = true;
    }
    c = in_.get();
  }
  if (quoted) throw CsvError(record_line_, "unterminated quoted field");
  end_field();
  return true;
}

std::vector<Row> read_all(std::istream& in, char sep) {
  Reader reader(in, sep);
  std::vector<Row> rows;
  Row row;
  while (reader.next(row)) rows.push_back(row);
  return rows;
}

std::string escape(std::string_view field, char sep) {
  bool needs = field.find_first_of(std::string{sep, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row, char sep) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << sep;
    out << escape(row[i], sep);
  }
  out << '\n';
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace storynet::csv
