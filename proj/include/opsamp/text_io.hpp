#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace opsamp {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// Whitespace-separated fields.
std::vector<std::string> split_fields(std::string_view line);

bool is_blank_or_comment(std::string_view line);

std::string_view trim(std::string_view text);

/// Parses "tag key=value key=value ..." header lines. Returns the key/value
/// map; throws ParseError when the leading tag differs from `expected_tag`.
std::map<std::string, std::string> parse_header(std::string_view line, std::string_view expected_tag);

} // namespace opsamp
