#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace ratefix::detail {

// Values written to JSON carry at most six fractional digits.
inline double round6(double v) {
    const double r = std::round(v * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r;  // no "-0.0"
}

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", round6(v));
    return buf;
}

}  // namespace ratefix::detail
