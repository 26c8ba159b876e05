#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace ccshap {

/// Shortest round-trip representation; identical bytes on every run.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

/// Parse a finite double; throws ParseError naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);

} // namespace ccshap
