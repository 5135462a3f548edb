#pragma once

#include <charconv>
#include <string>

namespace limitcurve {

/// Locale-independent decimal rendering with 17 significant digits, enough
/// to round-trip any double exactly.
inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace limitcurve
