#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "techval/core/common.hpp"

namespace techval::csv {

/// One parsed record plus the physical line it started on (1-based).
struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
/// newlines. CRLF is accepted.
class Reader {
 public:
  explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}

  std::optional<Row> next() {
    Row row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    row.line = line_ + 1;
    int c;
    while ((c = in_.get()) != EOF) {
      any = true;
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"') {
        in_quotes = true;
      } else if (ch == sep_) {
        row.fields.push_back(std::move(field));
        field.clear();
      } else if (ch == '\r') {
        // swallowed; the following '\n' ends the record
      } else if (ch == '\n') {
        ++line_;
        row.fields.push_back(std::move(field));
        return row;
      } else {
        field.push_back(ch);
      }
    }
    if (in_quotes) throw ParseError("unterminated quoted field starting on line " + std::to_string(row.line));
    if (!any) return std::nullopt;
    ++line_;
    row.fields.push_back(std::move(field));
    return row;
  }

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 0;
};

inline std::string quote(std::string_view s, char sep = ',') {
  const bool needs = s.find_first_of(std::string{sep, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields, char sep = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << sep;
    out << quote(fields[i], sep);
  }
  out << '\n';
}

}  // namespace techval::csv
