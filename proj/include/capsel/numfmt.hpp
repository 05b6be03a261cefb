#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace capsel {

inline constexpr int kSignificantDigits = 12;

/// Rounds to 12 significant digits. Every number written to JSON or CSV
/// passes through here so output text is stable across platforms.
inline double round_sig(double value) {
    if (!std::isfinite(value) || value == 0.0) return value == 0.0 ? 0.0 : value;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, value);
    return std::strtod(buf, nullptr);
}

inline std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, value == 0.0 ? 0.0 : value);
    return buf;
}

}  // namespace capsel
