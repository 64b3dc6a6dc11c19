#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankmerge/numerics.hpp"

namespace rankmerge {

/// Shortest decimal form that reads back to the same double; "NA" for missing.
std::string format_double(double v);

/// Fixed-point with the given number of decimals (used for plot coordinates).
std::string format_fixed(double v, int decimals);

/// Reals accepted by every table reader. Empty, "null", "NA" and "NaN" mean missing.
/// Returns std::nullopt when the cell is not a number at all.
std::optional<double> parse_cell(std::string_view cell);

/// Linear form of a p-value, or "<1e-308" when it cannot be printed as a normal double.
std::string format_p(LogP p);
std::string format_log10_p(LogP p);

std::vector<std::string_view> split(std::string_view text, char sep);
std::vector<std::string_view> split(std::string_view text, std::string_view sep);
std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);

/// Removes one pair of surrounding double quotes, if present.
std::string_view unquote(std::string_view text);

/// Strips a trailing '\r' so CRLF input reads like LF input.
std::string_view chomp_cr(std::string_view line);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace rankmerge
