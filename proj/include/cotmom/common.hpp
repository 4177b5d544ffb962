#ifndef COTMOM_COMMON_HPP
#define COTMOM_COMMON_HPP

#include <cstdint>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <cstdio>

#include <boost/multiprecision/cpp_int.hpp>

namespace cotmom {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline constexpr double kPi    = std::numbers::pi;
inline constexpr double kEuler = 0.57721566490153286060651209008240243;

// 17 significant digits: round-trips any double exactly.
inline std::string fp_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// raised when an empirical probe cannot certify its result
struct probe_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double to_double(const BigRat& r) {
    return static_cast<double>(r);
}

} // namespace cotmom

#endif
