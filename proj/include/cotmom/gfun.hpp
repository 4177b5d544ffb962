#ifndef COTMOM_GFUN_HPP
#define COTMOM_GFUN_HPP

// Evaluation of g(x) = sum_{l>=1} (1-2{lx})/l by three routes:
//   series  - Cesaro-averaged partial sums of the defining series
//   wilton  - g = L(x,n) + H(x) + remainder, where L(x,n) is the
//             alternating sum of gamma_k and H is built from F
//   dsin    - the divisor sine series sum d(n) sin(2pi n x)/n, which
//             equals (pi/2) g(x); the factor comes from the Fourier
//             expansion 1-2{y} = (2/pi) sum_m sin(2pi m y)/m
// plus the cotangent-sum identity route for exact rationals, where the
// defining series diverges.

#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "afunc.hpp"
#include "cache.hpp"
#include "cf.hpp"
#include "common.hpp"
#include "cotsum.hpp"
#include "summation.hpp"

namespace cotmom {

// D_sin(1,x) = (pi/2) g(x); empirical convention for the c0 identity is
// c0(a/q) = kKappaC0G * q * g(abar/q).  Both constants are pinned by the
// sign/constant probe (see signconv.hpp) and the cross-method test suite.
inline constexpr double kDsinToG = 2.0 / kPi;
inline constexpr double kKappaC0G = -1.0 / kPi;

// max |F| on [0,1] (attained at 0 where F = A(1)/2 ~ 0.6303)
inline double f_sup_bound() { return 0.5 * a1_constant() + 1e-9; }

enum class Averaging { none, cesaro1, cesaro2 };

inline const char* averaging_name(Averaging a) {
    switch (a) {
        case Averaging::none: return "none";
        case Averaging::cesaro1: return "cesaro1";
        case Averaging::cesaro2: return "cesaro2";
    }
    return "?";
}

// (C,k)-weighted sum of series terms a_1..a_N
template <class F>
double cesaro_sum(std::size_t N, Averaging avg, F&& term) {
    const double Nd = double(N);
    return blocked_sum(N, [&](std::size_t i) {
        double a = term(i);
        double j = double(i + 1);
        switch (avg) {
            case Averaging::none: return a;
            case Averaging::cesaro1: return a * (Nd - j + 1.0) / (Nd + 1.0);
            case Averaging::cesaro2:
                return a * (Nd - j + 1.0) * (Nd - j + 2.0) / ((Nd + 1.0) * (Nd + 2.0));
        }
        return a;
    });
}

// ------------------------------------------------------------------
// Wilton route
// ------------------------------------------------------------------

// default truncation for irrational-type inputs; beta_k has decayed to
// ~1e-17 by k = 40 for typical orbits
inline constexpr int kWiltonDepthDefault = 40;

// L(x,n) = sum_{k<=n} (-1)^k gamma_k(x), from an orbit
inline double wilton_partial(const Orbit& ob, int n) {
    if (n >= ob.size())
        throw domain_error("wilton_partial: n exceeds available orbit depth");
    KahanSum s;
    for (int k = 0; k <= n; ++k) s.add((k & 1) ? -ob.gamma(k) : ob.gamma(k));
    return s.value();
}

inline double wilton_partial(double x, int n) {
    Orbit ob = orbit(x, n, OrbitMode::fast);
    return wilton_partial(ob, n);
}

inline double wilton_partial(const BigRat& x, int n) {
    Orbit ob = orbit(x, n);
    return wilton_partial(ob, n);
}

// Independent route for the same quantity through the transfer operator
// Tf(x) = x f(alpha(x)):  L(x,n) = sum_v (-1)^v (T^v l)(x), l = log(1/x).
// Evaluated by direct recursion, recomputing the Gauss iterates per level.
namespace detail {
inline double t_iterate_l(double x, int v) {
    if (v == 0) return std::log(1.0 / x);
    double inv = 1.0 / x;
    double al = inv - std::floor(inv);
    return x * t_iterate_l(al, v - 1);
}
} // namespace detail

inline double wilton_partial_via_operator(double x, int n) {
    if (!(x > 0.0 && x < 1.0)) throw domain_error("wilton operator route: x in (0,1)");
    KahanSum s;
    for (int v = 0; v <= n; ++v) {
        double t = detail::t_iterate_l(x, v);
        s.add((v & 1) ? -t : t);
    }
    return s.value();
}

// H(x) = -2 sum_{j>=0} (-1)^j beta_{j-1}(x) F(alpha_j(x)).
// For rational x the sum terminates: alpha at the final step is 0 and
// contributes F(0+) = A(1)/2.  Returns the value and a tail bound.
struct HValue {
    double value;
    double err_bound;
};

template <class FEval>
HValue h_func_with(const Orbit& ob, int depth_cap, FEval&& feval) {
    KahanSum s;
    double beta_prev = 1.0;
    int j = 0;
    for (; j < ob.size() && j <= depth_cap; ++j) {
        double term = beta_prev * feval(ob.samples[std::size_t(j)].alpha);
        s.add((j & 1) ? -term : term);
        beta_prev = ob.samples[std::size_t(j)].beta;
    }
    double tail = 0.0;
    if (j < ob.size() || !ob.truncated_at_depth) {
        tail = 2.0 * beta_prev * f_sup_bound();  // alternating, |F| bounded
    } else if (ob.truncated_at_depth) {
        // final orbit point alpha_K = 0 contributes F(0+)
        double term = beta_prev * 0.5 * a1_constant();
        s.add((j & 1) ? -term : term);
    }
    return {-2.0 * s.value(), 2.0 * tail};
}

inline HValue h_func(double x, int depth_cap = kWiltonDepthDefault, double /*tol*/ = 0.0) {
    Orbit ob = orbit(x, depth_cap, OrbitMode::fast);
    return h_func_with(ob, depth_cap, [](double a) { return f_fast(a); });
}

inline HValue h_func(const BigRat& x, int depth_cap = 1 << 20) {
    Orbit ob = orbit(x, depth_cap);
    return h_func_with(ob, depth_cap, [](double a) { return f_fast(a); });
}

// ------------------------------------------------------------------
// divisor sieve and the sine series
// ------------------------------------------------------------------

inline constexpr char kDSieveMagic[7] = {'D', 'S', 'I', 'E', 'V', 'E', '1'};

class DivisorSieve {
public:
    // d(1..N); grows on demand, never shrinks
    const std::vector<std::uint32_t>& ensure(std::uint64_t N) {
        std::scoped_lock lk(mu_);
        if (d_.size() < N + 1) rebuild(N);
        return d_;
    }

    std::string serialize(std::uint64_t N) const {
        std::string out(kDSieveMagic, 7);
        detail::put_u64(out, N);
        for (std::uint64_t n = 1; n <= N; ++n) detail::put_u32(out, d_[n]);
        return out;
    }

    static std::vector<std::uint32_t> deserialize(const std::string& bytes,
                                                  std::uint64_t& N_out) {
        if (bytes.size() < 15 || bytes.compare(0, 7, kDSieveMagic, 7) != 0)
            throw data_error("divisor sieve cache: bad magic");
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
        std::uint64_t N = detail::get_u64(p + 7);
        if (bytes.size() != 15 + 4 * N) throw data_error("divisor sieve cache: truncated");
        std::vector<std::uint32_t> d(N + 1, 0);
        for (std::uint64_t n = 1; n <= N; ++n) d[n] = detail::get_u32(p + 15 + 4 * (n - 1));
        N_out = N;
        return d;
    }

private:
    void rebuild(std::uint64_t N) {
        d_.assign(N + 1, 0);
        for (std::uint64_t i = 1; i <= N; ++i)
            for (std::uint64_t j = i; j <= N; j += i) ++d_[j];
    }

    std::mutex mu_;
    std::vector<std::uint32_t> d_;
};

inline DivisorSieve& divisor_sieve() {
    static DivisorSieve s;
    return s;
}

// (averaged) partial sum of sum_n d(n) sin(2 pi n x)/n
inline double d_sin(double x, std::uint64_t N, Averaging avg = Averaging::cesaro2) {
    if (N < 1) throw domain_error("d_sin: N >= 1");
    const auto& d = divisor_sieve().ensure(N);
    return cesaro_sum(N, avg, [&](std::size_t i) {
        double n = double(i + 1);
        double ph = n * x;
        ph -= std::floor(ph);
        return double(d[i + 1]) * std::sin(2 * kPi * ph) / n;
    });
}

// rational points: the phase is periodic mod q, so a q-entry sine table
// keeps the arguments exact
inline double d_sin_rational(std::uint64_t a, std::uint64_t q, std::uint64_t N,
                             Averaging avg = Averaging::cesaro2) {
    check_coprime_pair(a % q, q, "d_sin_rational");
    const auto& d = divisor_sieve().ensure(N);
    std::vector<double> stab(q);
    for (std::uint64_t j = 0; j < q; ++j) stab[j] = std::sin(2 * kPi * double(j) / double(q));
    std::uint64_t idx = 0;
    return cesaro_sum(N, avg, [&](std::size_t i) {
        idx += a;
        if (idx >= q) idx -= q;
        return double(d[i + 1]) * stab[idx] / double(i + 1);
    });
}

// ------------------------------------------------------------------
// g evaluation
// ------------------------------------------------------------------

enum class GMethod { series, wilton, dsin, c0_identity, automatic };

inline const char* g_method_name(GMethod m) {
    switch (m) {
        case GMethod::series: return "series";
        case GMethod::wilton: return "wilton";
        case GMethod::dsin: return "dsin";
        case GMethod::c0_identity: return "c0-identity";
        case GMethod::automatic: return "auto";
    }
    return "?";
}

struct GValue {
    double value = 0.0;
    double err_bound = 0.0;
    GMethod method = GMethod::automatic;
    std::string detail;
};

struct WiltonEval {
    std::vector<double> partials;  // L(x,n), n = 0..N
    double h = 0.0;
    double h_err = 0.0;
    double remainder_bound = 0.0;  // for (-1)^(n+1) T^(n+1) W(x)
};

// Documented remainder slack: |W(y) - log(1/y)| stays below ~1.2 on (0,1)
// for orbits of practical depth, and log(1/alpha_{n+1}) <= -log(DBL_MIN).
inline constexpr double kWiltonTailSlack = 4.0;
inline constexpr double kWiltonWBound = 64.0;

inline WiltonEval wilton_eval(const Orbit& ob, int n) {
    WiltonEval we;
    int avail = std::min(n, ob.size() - 1);
    we.partials.resize(std::size_t(avail) + 1);
    KahanSum s;
    for (int k = 0; k <= avail; ++k) {
        s.add((k & 1) ? -ob.gamma(k) : ob.gamma(k));
        we.partials[std::size_t(k)] = s.value();
    }
    HValue hv = h_func_with(ob, ob.size(), [](double a) { return f_fast(a); });
    we.h = hv.value;
    we.h_err = hv.err_bound;
    if (avail + 1 < ob.size()) {
        double al_next = ob.samples[std::size_t(avail + 1)].alpha;
        we.remainder_bound =
            ob.beta(avail) * (std::log(1.0 / std::max(al_next, 1e-300)) + kWiltonTailSlack);
    } else {
        we.remainder_bound = ob.beta(avail) * kWiltonTailSlack;
    }
    return we;
}

inline double g_series(double x, std::uint64_t L, Averaging avg = Averaging::cesaro2) {
    if (!(x > 0.0 && x < 1.0)) throw domain_error("g_series: x in (0,1)");
    return cesaro_sum(L, avg, [&](std::size_t i) {
        double l = double(i + 1);
        double ph = l * x;
        ph -= std::floor(ph);
        return (1.0 - 2.0 * ph) / l;
    });
}

struct GEvalOptions {
    int wilton_n = kWiltonDepthDefault;
    std::uint64_t series_len = 1'000'000;
    std::uint64_t dsin_len = 1'000'000;
    Averaging avg = Averaging::cesaro2;
};

// systematic error carried by the F table through H (2 * sum beta * tol_F)
inline double h_table_error() { return 2.0 * 4.0 * FGrid::kTol; }

inline GValue g_eval(double x, GMethod method = GMethod::automatic, double tol = 1e-6,
                     const GEvalOptions& opt = {}) {
    if (!(x > 0.0 && x < 1.0)) throw domain_error("g_eval: x in (0,1)");
    if (method == GMethod::automatic) method = GMethod::wilton;
    GValue g;
    g.method = method;
    switch (method) {
        case GMethod::series: {
            double v = g_series(x, opt.series_len, opt.avg);
            double v2 = g_series(x, opt.series_len / 2, opt.avg);
            g.value = v;
            g.err_bound = 2.0 * std::abs(v - v2) + 20.0 / double(opt.series_len);
            g.detail = "L=" + std::to_string(opt.series_len) + ",avg=" + averaging_name(opt.avg);
            break;
        }
        case GMethod::wilton: {
            Orbit ob = orbit(x, opt.wilton_n + 1, OrbitMode::fast);
            WiltonEval we = wilton_eval(ob, opt.wilton_n);
            g.value = we.partials.back() + we.h;
            g.err_bound = we.remainder_bound + we.h_err + h_table_error();
            g.detail = "n=" + std::to_string(int(we.partials.size()) - 1);
            break;
        }
        case GMethod::dsin: {
            double v = kDsinToG * d_sin(x, opt.dsin_len, opt.avg);
            double v2 = kDsinToG * d_sin(x, opt.dsin_len / 2, opt.avg);
            g.value = v;
            g.err_bound = 2.0 * std::abs(v - v2) + 40.0 / double(opt.dsin_len);
            g.detail = "N=" + std::to_string(opt.dsin_len) + ",avg=" + averaging_name(opt.avg);
            break;
        }
        case GMethod::c0_identity:
            throw domain_error("g_eval: c0-identity route needs an exact rational input");
        case GMethod::automatic:
            break;
    }
    (void)tol;
    return g;
}

// Exact rational input.  The defining series diverges at rationals (the
// per-period mean of 1-2{lx} is 1/q), so the value is defined through the
// probed cotangent identity g(a/q) = c0(abar/q) / (kKappaC0G * q); the
// Cesaro-averaged sine series provides an independent cross-check.
inline GValue g_eval(const BigRat& x, GMethod method = GMethod::automatic, double tol = 1e-6,
                     const GEvalOptions& opt = {}) {
    if (!in_unit_open(x)) throw domain_error("g_eval: x in (0,1)");
    if (method == GMethod::automatic) method = GMethod::c0_identity;
    if (method == GMethod::series)
        throw domain_error("g_eval: the defining series diverges at rational x");
    if (method == GMethod::dsin) {
        std::uint64_t a = static_cast<std::uint64_t>(boost::multiprecision::numerator(x));
        std::uint64_t q = static_cast<std::uint64_t>(boost::multiprecision::denominator(x));
        GValue g;
        g.method = method;
        double v = kDsinToG * d_sin_rational(a, q, opt.dsin_len, opt.avg);
        double v2 = kDsinToG * d_sin_rational(a, q, opt.dsin_len / 2, opt.avg);
        g.value = v;
        g.err_bound = 2.0 * std::abs(v - v2) + 40.0 / double(opt.dsin_len);
        g.detail = "N=" + std::to_string(opt.dsin_len) + ",avg=" + averaging_name(opt.avg);
        return g;
    }
    if (method == GMethod::wilton) {
        // finite orbit; remainder vanishes at the terminating step
        Orbit ob = orbit(x, 1 << 20);
        GValue g;
        g.method = method;
        WiltonEval we = wilton_eval(ob, ob.size() - 1);
        g.value = we.partials.back() + we.h;
        g.err_bound = we.h_err + h_table_error();
        g.detail = "n=" + std::to_string(int(we.partials.size()) - 1) + ",terminated";
        return g;
    }
    // c0 identity
    std::uint64_t a = static_cast<std::uint64_t>(boost::multiprecision::numerator(x));
    std::uint64_t q = static_cast<std::uint64_t>(boost::multiprecision::denominator(x));
    std::uint64_t abar = mod_inverse(a, q);
    GValue g;
    g.method = GMethod::c0_identity;
    g.value = c0(abar, q) / (kKappaC0G * double(q));
    g.err_bound = std::max(1e-12 * std::abs(g.value), 1e-12);
    g.detail = "abar=" + std::to_string(abar);
    (void)tol;
    return g;
}

} // namespace cotmom

#endif
