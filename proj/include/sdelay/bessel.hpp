#pragma once

#include <cmath>

namespace sdelay::bessel {

namespace detail {

// 1/2 * sum_m (sign * z2/4)^m / (m! (m+1)!), stopped once a term drops
// below 1e-16 of the running sum.
inline double order_one_ratio(double z2, double sign) {
    const double q = sign * 0.25 * z2;
    double term = 0.5;
    double sum = 0.0;
    for (int m = 1; m < 200; ++m) {
        sum += term;
        term *= q / (static_cast<double>(m) * static_cast<double>(m + 1));
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace detail

/// I_1(z)/z as a function of z^2. Regular at z = 0 where it equals 1/2,
/// so callers never form the 0/0 quotient on the kernel diagonal.
inline double i1_over_z(double z2) { return detail::order_one_ratio(z2, 1.0); }

/// J_1(z)/z as a function of z^2 (alternating series, value 1/2 at z = 0).
inline double j1_over_z(double z2) { return detail::order_one_ratio(z2, -1.0); }

}  // namespace sdelay::bessel
