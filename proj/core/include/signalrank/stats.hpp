// Small numeric helpers: normal CDF via erfc and compensated summation.
#pragma once

#include <cmath>

namespace signalrank {

// P(N(0,1) <= x). erfc keeps relative accuracy in the far tails where
// 1 - erf(x) would cancel.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Two-sided tail probability of |N(0,1)| >= |z|.
inline double two_sided_p(double z) { return std::erfc(std::fabs(z) * M_SQRT1_2); }

// Kahan compensated accumulator. Aggregations that feed reported estimates
// use this with a fixed traversal order so serial and parallel paths agree
// bit-for-bit.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;

    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

}  // namespace signalrank
