#ifndef COTMOM_QUADRATURE_HPP
#define COTMOM_QUADRATURE_HPP

// Panel quadrature for integrands with logarithmic endpoint singularities:
// dyadic annuli toward declared singular points, Gauss-Legendre inside each
// annulus, plus bisection adaptivity for structure away from the declared
// points.  Refinement parameters only ever ADD panels inside the innermost
// annuli, so two runs at different depths share every other node; stability
// diffs measure exactly the newly resolved singular mass.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "common.hpp"
#include "summation.hpp"

namespace cotmom {

struct GaussRule {
    const double* x;
    const double* w;
    int n;
};

namespace detail {
// Gauss-Legendre on [-1,1]
inline constexpr double kGL8X[8] = {
    -0.9602898564975362, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975362};
inline constexpr double kGL8W[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
} // namespace detail

inline GaussRule gl8() { return {detail::kGL8X, detail::kGL8W, 8}; }

// Accumulates a vector-valued integrand.
template <int NV>
struct VecAccum {
    std::array<KahanSum, NV> acc{};
    void add(const std::array<double, NV>& v, double w) {
        for (int i = 0; i < NV; ++i) acc[std::size_t(i)].add(v[std::size_t(i)] * w);
    }
    std::array<double, NV> value() const {
        std::array<double, NV> out{};
        for (int i = 0; i < NV; ++i) out[std::size_t(i)] = acc[std::size_t(i)].value();
        return out;
    }
};

struct PanelParams {
    int dyadic_levels = 40;   // annuli per singular endpoint
    int adapt_depth = 10;     // max bisection depth inside an annulus
    double adapt_tol = 1e-9;  // absolute per-panel bisection tolerance
    double min_width_ulp = 32.0;
};

template <int NV, class F>
void gl_panel(const F& f, double a, double b, VecAccum<NV>& out) {
    GaussRule r = gl8();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < r.n; ++i) {
        std::array<double, NV> v;
        f(c + h * r.x[i], v);
        out.add(v, h * r.w[i]);
    }
}

namespace detail {

template <int NV, class F>
std::array<double, NV> gl_estimate(const F& f, double a, double b) {
    VecAccum<NV> acc;
    gl_panel<NV>(f, a, b, acc);
    return acc.value();
}

template <int NV, class F>
void adapt_panel(const F& f, double a, double b, int depth, const PanelParams& pp,
                 VecAccum<NV>& out) {
    auto whole = gl_estimate<NV>(f, a, b);
    if (depth >= pp.adapt_depth) {
        for (int i = 0; i < NV; ++i) out.acc[std::size_t(i)].add(whole[std::size_t(i)]);
        return;
    }
    double m = 0.5 * (a + b);
    auto left = gl_estimate<NV>(f, a, m);
    auto right = gl_estimate<NV>(f, m, b);
    double dev = 0.0;
    for (int i = 0; i < NV; ++i)
        dev = std::max(dev, std::abs(left[std::size_t(i)] + right[std::size_t(i)] -
                                     whole[std::size_t(i)]));
    if (dev <= pp.adapt_tol) {
        for (int i = 0; i < NV; ++i)
            out.acc[std::size_t(i)].add(left[std::size_t(i)] + right[std::size_t(i)]);
        return;
    }
    adapt_panel<NV>(f, a, m, depth + 1, pp, out);
    adapt_panel<NV>(f, m, b, depth + 1, pp, out);
}

} // namespace detail

// Integrate over [a,b] whose two endpoints are (potentially) singular:
// dyadic annuli shrink toward both ends from the midpoint.  Annuli narrower
// than min_width_ulp * ulp are dropped (the integrable log-power mass there
// is below double resolution).
template <int NV, class F>
void integrate_singular_gap(const F& f, double a, double b, const PanelParams& pp,
                            VecAccum<NV>& out) {
    if (!(b > a)) return;
    double mid = 0.5 * (a + b);
    for (int side = 0; side < 2; ++side) {
        double endpoint = side == 0 ? a : b;
        double w = side == 0 ? (mid - a) : (b - mid);
        if (w <= 0.0) continue;
        double ulp_floor = pp.min_width_ulp * std::abs(endpoint) *
                           std::numeric_limits<double>::epsilon();
        double outer = w;
        for (int j = 0; j < pp.dyadic_levels; ++j) {
            double inner = outer * 0.5;
            double lo = side == 0 ? endpoint + inner : endpoint - outer;
            double hi = side == 0 ? endpoint + outer : endpoint - inner;
            if (hi - lo < ulp_floor) break;
            detail::adapt_panel<NV>(f, lo, hi, 0, pp, out);
            outer = inner;
        }
    }
}

// ascending Farey sequence of order n (0/1 .. 1/1)
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> farey_sequence(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    std::uint64_t a = 0, b = 1, c = 1, d = n;
    out.emplace_back(a, b);
    while (c <= n) {
        std::uint64_t k = (n + b) / d;
        std::uint64_t a2 = k * c - a, b2 = k * d - b;
        a = c;
        b = d;
        c = a2;
        d = b2;
        out.emplace_back(a, b);
    }
    return out;
}

} // namespace cotmom

#endif
