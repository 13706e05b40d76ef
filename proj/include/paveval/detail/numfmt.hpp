#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "paveval/errors.hpp"

namespace paveval::detail {

// Shortest decimal form that parses back to the same double; integral values
// print without a decimal point.
inline std::string format_number(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError(what + ": not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view s, const std::string& what) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError(what + ": not an integer: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace paveval::detail
