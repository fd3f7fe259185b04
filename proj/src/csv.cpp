#include "footprint/csv.hpp"

#include <stdexcept>

namespace footprint::csv {

std::vector<Record> read(std::string_view text) {
  std::vector<Record> out;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();

  while (i < n) {
    Record rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    bool done = false;
    while (i < n && !done) {
      char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (field.empty() && !quoted_field) {
            in_quotes = true;
            quoted_field = true;
          } else {
            field += c;
          }
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          quoted_field = false;
          ++i;
          break;
        case '\r':
          if (i + 1 < n && text[i + 1] == '\n') {
            ++i;
          } else {
            field += c;
            ++i;
            break;
          }
          [[fallthrough]];
        case '\n':
          ++i;
          ++line;
          done = true;
          break;
        default:
          field += c;
          ++i;
      }
    }
    if (in_quotes) {
      throw std::runtime_error("unterminated quoted field starting on line " +
                               std::to_string(rec.line));
    }
    if (rec.fields.empty() && field.empty() && !quoted_field) continue;  // blank line
    rec.fields.push_back(std::move(field));
    out.push_back(std::move(rec));
  }
  return out;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace footprint::csv
