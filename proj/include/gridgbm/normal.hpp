#pragma once

#include <cmath>
#include <numbers>

namespace gridgbm {

inline double normalPdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// erfc form keeps full relative accuracy in the lower tail.
inline double normalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normalCdf(double x, double mean, double variance) {
    return normalCdf((x - mean) / std::sqrt(variance));
}

}  // namespace gridgbm
