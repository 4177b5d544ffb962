#ifndef COTMOM_CF_EXTENDED_HPP
#define COTMOM_CF_EXTENDED_HPP

// Extended-precision Gauss-map orbit (50 decimal digits, ~166-bit
// significand).  Validation companion to the plain double iteration: the
// Gauss map amplifies per-step rounding by roughly q_k^2, which double
// precision cannot absorb past k ~ 25.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cf.hpp"

namespace cotmom {

inline Orbit orbit_extended(double x, int kmax) {
    using F = boost::multiprecision::cpp_bin_float_50;
    if (!(x > 0.0 && x < 1.0)) throw domain_error("orbit: x must lie in (0,1)");
    Orbit ob;
    ob.x = x;
    ob.depth_limit = kmax;
    F al = x, beta_prev = 1;
    for (int k = 0; k <= kmax; ++k) {
        if (al <= 0) {
            ob.truncated_at_depth = true;
            break;
        }
        F gamma = beta_prev * log(1 / al);
        F beta = beta_prev * al;
        ob.samples.push_back({k, static_cast<double>(al), static_cast<double>(beta),
                              static_cast<double>(gamma)});
        beta_prev = beta;
        F inv = 1 / al;
        al = inv - floor(inv);
    }
    return ob;
}

} // namespace cotmom

#endif
