#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "edgenn/error.hpp"

namespace edgenn {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Strict full-token parse; throws ParseError naming `where`.
inline double parse_double(std::string_view text, const std::string& where) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError(where, "expected a number, got '" + std::string(text) + "'");
    return value;
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& where) {
    Int value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError(where, "expected an integer, got '" + std::string(text) + "'");
    return value;
}

}  // namespace edgenn
