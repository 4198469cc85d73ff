#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kpicast::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and `""`
/// escapes. Returns std::nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_line(std::string_view line);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);

/// Shortest decimal representation that parses back to the same double.
std::string format_real(double value);

/// Strict decimal parse of the whole field; no leading/trailing junk.
std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

/// Strips a trailing '\r' and surrounding blanks.
std::string_view trim(std::string_view text);

}  // namespace kpicast::csv
