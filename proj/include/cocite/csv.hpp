#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cocite::csv {

/// Splits one CSV line into fields (RFC 4180 quoting, no embedded newlines).
/// Throws DataError on an unterminated quote.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or leading/trailing blank.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

/// Strips a trailing '\r' (files written on Windows).
std::string_view chomp(std::string_view line);

/// True for lines that carry no data: empty, or a '#' metadata comment.
bool is_skippable(std::string_view line);

}  // namespace cocite::csv
