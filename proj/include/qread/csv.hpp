#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace qread {

/// Reals in output files: 17 significant digits, '.' decimal point, `nan` /
/// `inf` sentinels.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace qread
