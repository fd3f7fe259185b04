#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace footprint::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// Splits RFC 4180-style text into records. Accepts `\n` and `\r\n`,
/// double-quoted fields with embedded commas, quotes, and newlines.
/// Blank lines are skipped. Throws std::runtime_error on an unterminated quote.
std::vector<Record> read(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR, or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace footprint::csv
