#pragma once

#include <algorithm>
#include <cmath>

namespace afscale {

/// Water-filling amplification: sqrt(1/(g nu)) - b/g for g above the cutoff b^2 nu,
/// zero otherwise. Continuous at the cutoff.
inline double waterfill_alpha2(double g, double nu, double b) {
    if (!(g > b * b * nu)) return 0.0;
    return std::max(0.0, std::sqrt(1.0 / (g * nu)) - b / g);
}

}  // namespace afscale
