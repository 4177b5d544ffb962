#ifndef COTMOM_SIGNCONV_HPP
#define COTMOM_SIGNCONV_HPP

// Empirical determination of the sign/constant conventions tying together
// c0, the standard Vasyunin sum, the divisor sine series and g.  The
// literature's printed conventions are mutually inconsistent, so nothing
// here is assumed: the probe fits the constants and fails loudly if they
// are unstable or match none of the candidate closed forms.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cotsum.hpp"
#include "gfun.hpp"
#include "parallel.hpp"
#include "primes.hpp"

namespace cotmom {

struct SignConvention {
    int s_dsin = 0;          // sign in c0(a/q) = s_dsin * |const| * q * D_sin(1, abar/q)
    double kappa = 0.0;      // fitted constant in c0(a/q) = kappa * q * g(abar/q)
    double kappa_exact = 0;  // nearest closed-form candidate
    std::string kappa_name;  // e.g. "-1/pi"
    bool paper_constant_matches = false;  // literal +2/pi (from 2 q pi^-2 * pi g)
    int s_vas = 0;           // sign in vasyunin_std(r,b) = s_vas * c0(rbar,b)
    double max_vas_resid = 0.0;
    double max_rel_resid = 0.0;    // worst per-point residual of the kappa fit
    double kappa_spread = 0.0;     // max relative deviation of kappa across q
    std::vector<std::pair<std::uint64_t, double>> kappa_by_q;
};

struct SignProbeOptions {
    std::uint64_t vas_bmax = 200;
    std::uint64_t dsin_len = 1'000'000;
    double vas_tol = 1e-8;
    double fit_tol = 1e-3;       // per-point relative residual
    double spread_tol = 0.01;    // cross-q stability of kappa
    unsigned threads = 0;
};

inline SignConvention sign_probe(const std::vector<std::uint64_t>& q_list,
                                 const SignProbeOptions& opt = {}) {
    for (auto q : q_list)
        if (!is_prime(q) || q > 1000)
            throw domain_error("sign_probe: q_list must hold primes <= 1000");
    SignConvention sc;

    // --- s_vas: exhaustive sweep of vasyunin_std(r,b) against c0(rbar,b) ---
    double best_resid[2] = {0.0, 0.0};  // index 0: s=+1, 1: s=-1
    for (std::uint64_t b = 2; b <= opt.vas_bmax; ++b) {
        std::vector<double> c0v(b, 0.0);
        for (std::uint64_t r = 1; r < b; ++r)
            if (std::gcd(r, b) == 1) c0v[r] = c0(r, b);
        for (std::uint64_t r = 1; r < b; ++r) {
            if (std::gcd(r, b) != 1) continue;
            double v = vasyunin(r, b, VasyuninVariant::standard);
            double c = c0v[mod_inverse(r, b)];
            best_resid[0] = std::max(best_resid[0], std::abs(v - c));
            best_resid[1] = std::max(best_resid[1], std::abs(v + c));
        }
    }
    sc.s_vas = best_resid[0] <= best_resid[1] ? 1 : -1;
    sc.max_vas_resid = std::min(best_resid[0], best_resid[1]);
    if (sc.max_vas_resid > opt.vas_tol)
        throw probe_error("sign_probe: no global sign explains the Vasyunin relation (resid " +
                          fp_str(sc.max_vas_resid) + ")");

    // --- kappa: least squares of c0(a/q) on q*g(abar/q), g from averaged
    //     D_sin with the Fourier factor 2/pi ---
    unsigned threads = opt.threads ? opt.threads : default_threads();
    for (auto q : q_list) {
        std::vector<double> gvals(q - 1);
        parallel_for(q - 1, threads, [&](std::size_t i) {
            std::uint64_t abar = mod_inverse(i + 1, q);
            gvals[i] = kDsinToG * d_sin_rational(abar, q, opt.dsin_len, Averaging::cesaro2);
        }, 1);
        double num = 0, den = 0;
        std::vector<double> c0s(q - 1);
        for (std::uint64_t a = 1; a < q; ++a) {
            double cv = c0(a, q);
            double qg = double(q) * gvals[a - 1];
            c0s[a - 1] = cv;
            num += cv * qg;
            den += qg * qg;
        }
        double kq = num / den;
        for (std::uint64_t a = 1; a < q; ++a) {
            double qg = double(q) * gvals[a - 1];
            double resid = std::abs(c0s[a - 1] - kq * qg) / std::max(std::abs(c0s[a - 1]), 1e-30);
            sc.max_rel_resid = std::max(sc.max_rel_resid, resid);
        }
        sc.kappa_by_q.emplace_back(q, kq);
    }
    double kmean = 0;
    for (auto& [q, k] : sc.kappa_by_q) kmean += k;
    kmean /= double(sc.kappa_by_q.size());
    for (auto& [q, k] : sc.kappa_by_q)
        sc.kappa_spread = std::max(sc.kappa_spread, std::abs(k - kmean) / std::abs(kmean));
    sc.kappa = kmean;
    sc.s_dsin = kmean < 0 ? -1 : 1;

    if (sc.max_rel_resid > opt.fit_tol)
        throw probe_error("sign_probe: kappa fit residual " + fp_str(sc.max_rel_resid) +
                          " exceeds tolerance");
    if (sc.kappa_spread > opt.spread_tol)
        throw probe_error("sign_probe: kappa unstable across q (spread " +
                          fp_str(sc.kappa_spread) + ")");

    // snap to the nearest closed-form candidate
    struct Cand {
        double v;
        const char* name;
    };
    const Cand cands[] = {{-1.0 / kPi, "-1/pi"},     {1.0 / kPi, "+1/pi"},
                          {-2.0 / kPi, "-2/pi"},     {2.0 / kPi, "+2/pi"},
                          {-2.0 / (kPi * kPi), "-2/pi^2"}, {2.0 / (kPi * kPi), "+2/pi^2"}};
    double best = 1e300;
    for (const auto& c : cands) {
        double d = std::abs(kmean - c.v);
        if (d < best) {
            best = d;
            sc.kappa_exact = c.v;
            sc.kappa_name = c.name;
        }
    }
    if (best > 0.01 * std::abs(kmean))
        throw probe_error("sign_probe: fitted kappa " + fp_str(kmean) +
                          " matches no closed-form candidate");
    // literal chain in the source material: c0 = 2 q pi^-2 D_sin, D_sin = pi g
    sc.paper_constant_matches = (sc.kappa_name == "+2/pi");
    return sc;
}

} // namespace cotmom

#endif
