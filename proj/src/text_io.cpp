#include "opsamp/text_io.hpp"

#include "opsamp/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace opsamp {

std::string format_double(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return {buffer.data(), result.ptr};
}

double parse_double(std::string_view text)
{
    text = trim(text);
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end)
        throw ParseError("not a number: '" + std::string(text) + "'");
    return value;
}

long long parse_integer(std::string_view text)
{
    text = trim(text);
    long long value = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end)
        throw ParseError("not an integer: '" + std::string(text) + "'");
    return value;
}

std::vector<std::string> split_fields(std::string_view line)
{
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) fields.emplace_back(line.substr(start, i - start));
    }
    return fields;
}

std::string_view trim(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    return text;
}

bool is_blank_or_comment(std::string_view line)
{
    line = trim(line);
    return line.empty() || line.front() == '#';
}

std::map<std::string, std::string> parse_header(std::string_view line, std::string_view expected_tag)
{
    const auto fields = split_fields(line);
    if (fields.empty() || fields.front() != expected_tag)
        throw ParseError("expected header '" + std::string(expected_tag) + "'");
    std::map<std::string, std::string> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("malformed header field '" + fields[i] + "'");
        values[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    return values;
}

} // namespace opsamp
