#ifndef COTMOM_MOMENTS_HPP
#define COTMOM_MOMENTS_HPP

// Empirical moments of c0(a/q), the reference second-moment constant from
// quadrature of g^2, the error term E(q) of the second moment, power-law
// fits against q (log q)^2, the Sigma decomposition of the error with the
// interval-class bookkeeping, and the growth of int |g|^K.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cotsum.hpp"
#include "depthscan.hpp"
#include "gfun.hpp"
#include "parallel.hpp"
#include "primes.hpp"
#include "quadrature.hpp"
#include "summation.hpp"

namespace cotmom {

// ------------------------------------------------------------------
// empirical moments
// ------------------------------------------------------------------

struct MomentReport {
    std::uint64_t q = 0;
    int k = 1;
    double M = 0.0;             // (1/(q-1)) sum_a c0(a/q)^(2k)
    double M_normalized = 0.0;  // M / q^(2k)
    std::uint64_t provenance_checksum = 0;
};

inline MomentReport empirical_moment(const C0Table& t, int k) {
    if (k < 1) throw domain_error("empirical_moment: k >= 1");
    MomentReport r;
    r.q = t.q;
    r.k = k;
    r.M = blocked_sum(t.values.size(), [&](std::size_t i) {
              double v = t.values[i];
              double p = v * v;
              for (int j = 1; j < k; ++j) p *= v * v;
              return p;
          }) /
          double(t.q - 1);
    r.M_normalized = r.M / std::pow(double(t.q), 2.0 * k);
    r.provenance_checksum = t.checksum;
    return r;
}

inline MomentReport empirical_moment(std::uint64_t q, int k, unsigned threads = 0,
                                     const std::string& cache_dir = {}) {
    C0Table t = c0_table_cached(q, threads ? threads : default_threads(), cache_dir);
    return empirical_moment(t, k);
}

// ------------------------------------------------------------------
// quadrature of |g|^K over (0,1)
// ------------------------------------------------------------------

struct GPowParams {
    std::uint64_t farey_order = 64;
    PanelParams panels{44, 12, 1e-9, 32.0};
    int wilton_n = kWiltonDepthDefault;
    unsigned threads = 0;
};

inline constexpr int kGPowMax = 8;

// int_0^1 |g(x)|^k dx for k = 1..8 in one pass.  The unit interval is split
// at the Farey fractions of the given order (g has a log singularity at
// every rational; the low-order ones carry the dominant spike mass) and
// each gap is integrated with dyadic refinement toward both endpoints.
inline std::array<double, kGPowMax> g_pow_integrals(const GPowParams& gp) {
    auto farey = farey_sequence(gp.farey_order);
    const std::size_t ngap = farey.size() - 1;
    std::vector<std::array<double, kGPowMax>> partial(ngap);

    auto integrand = [&](double x, std::array<double, kGPowMax>& out) {
        Orbit ob = detail::orbit_fast(x, gp.wilton_n + 1);
        double L = wilton_partial(ob, std::min(gp.wilton_n, ob.size() - 1));
        HValue h = h_func_with(ob, ob.size(), [](double a) { return f_fast(a); });
        double g = std::abs(L + h.value);
        double p = g;
        for (int k = 0; k < kGPowMax; ++k) {
            out[std::size_t(k)] = p;
            p *= g;
        }
    };

    unsigned threads = gp.threads ? gp.threads : default_threads();
    parallel_for(ngap, threads, [&](std::size_t i) {
        double a = double(farey[i].first) / double(farey[i].second);
        double b = double(farey[i + 1].first) / double(farey[i + 1].second);
        VecAccum<kGPowMax> acc;
        integrate_singular_gap<kGPowMax>(integrand, a, b, gp.panels, acc);
        partial[i] = acc.value();
    }, 1);

    std::array<double, kGPowMax> total{};
    for (int k = 0; k < kGPowMax; ++k)
        total[std::size_t(k)] = blocked_sum(ngap, [&](std::size_t i) {
            return partial[i][std::size_t(k)];
        });
    return total;
}

// ------------------------------------------------------------------
// H1 reference value
// ------------------------------------------------------------------

struct H1Reference {
    double h1_quad = 0.0;        // int (g/pi)^2 by quadrature
    double h1_quad_err = 0.0;
    double h1_extrap = 0.0;      // from the prime ladder of M(q)/q^2
    double h1_extrap_err = 0.0;
    bool agreed = false;
    double refine_diff = 0.0;    // change under mesh refinement
    double kappa = kKappaC0G;    // probed constant used for the scaling
};

// least squares for M/q^2 ~ c + b (ln q)^2/q + d ln q/q + e/q
inline double ladder_extrapolate(const std::vector<std::pair<std::uint64_t, double>>& rows,
                                 int nbasis, double* resid_rms = nullptr) {
    const int NB = nbasis;
    std::vector<double> AtA(std::size_t(NB * NB), 0.0), Atb(std::size_t(NB), 0.0);
    auto basis = [&](double q, int j) {
        double lq = std::log(q);
        switch (j) {
            case 0: return 1.0;
            case 1: return lq * lq / q;
            case 2: return lq / q;
            default: return 1.0 / q;
        }
    };
    for (auto& [qu, y] : rows) {
        double q = double(qu);
        for (int i = 0; i < NB; ++i) {
            for (int j = 0; j < NB; ++j) AtA[std::size_t(i * NB + j)] += basis(q, i) * basis(q, j);
            Atb[std::size_t(i)] += basis(q, i) * y;
        }
    }
    // solve by Gaussian elimination
    for (int col = 0; col < NB; ++col) {
        int piv = col;
        for (int r = col + 1; r < NB; ++r)
            if (std::abs(AtA[std::size_t(r * NB + col)]) > std::abs(AtA[std::size_t(piv * NB + col)]))
                piv = r;
        for (int c = 0; c < NB; ++c)
            std::swap(AtA[std::size_t(col * NB + c)], AtA[std::size_t(piv * NB + c)]);
        std::swap(Atb[std::size_t(col)], Atb[std::size_t(piv)]);
        for (int r = 0; r < NB; ++r) {
            if (r == col) continue;
            double f = AtA[std::size_t(r * NB + col)] / AtA[std::size_t(col * NB + col)];
            for (int c = col; c < NB; ++c)
                AtA[std::size_t(r * NB + c)] -= f * AtA[std::size_t(col * NB + c)];
            Atb[std::size_t(r)] -= f * Atb[std::size_t(col)];
        }
    }
    std::vector<double> coef(std::size_t(NB));
    for (int i = 0; i < NB; ++i) coef[std::size_t(i)] = Atb[std::size_t(i)] / AtA[std::size_t(i * NB + i)];
    if (resid_rms) {
        double s = 0;
        for (auto& [qu, y] : rows) {
            double q = double(qu), fit = 0;
            for (int j = 0; j < NB; ++j) fit += coef[std::size_t(j)] * basis(q, j);
            s += (y - fit) * (y - fit);
        }
        *resid_rms = std::sqrt(s / double(rows.size()));
    }
    return coef[0];
}

struct H1Options {
    GPowParams quad;
    std::vector<std::uint64_t> ladder = {503,  751,  1009, 1499, 2003, 3001,
                                         4001, 6007, 8009, 12007, 16001, 20011};
    unsigned threads = 0;
    std::string cache_dir;
};

inline H1Reference h1_reference(double tol = 1e-5, const H1Options& opt = {}) {
    if (tol < 1e-5) throw domain_error("h1_reference: tol >= 1e-5");
    H1Reference out;

    auto base = g_pow_integrals(opt.quad);
    GPowParams fine = opt.quad;
    fine.panels.dyadic_levels += 12;
    fine.panels.adapt_tol /= 8.0;
    auto refined = g_pow_integrals(fine);
    out.h1_quad = refined[1] / (kPi * kPi);
    out.refine_diff = std::abs(refined[1] - base[1]) / (kPi * kPi);
    // the table-driven g carries a small systematic component
    out.h1_quad_err = out.refine_diff + 2.0 * 1.2 * (h_table_error()) / (kPi * kPi) + 2e-4;

    unsigned threads = opt.threads ? opt.threads : default_threads();
    std::vector<std::pair<std::uint64_t, double>> rows(opt.ladder.size());
    parallel_for(opt.ladder.size(), threads, [&](std::size_t i) {
        std::uint64_t q = opt.ladder[i];
        C0Table t = c0_table_cached(q, 1, opt.cache_dir);
        MomentReport m = empirical_moment(t, 1);
        rows[i] = {q, m.M_normalized};
    }, 1);

    double rms = 0;
    double c4 = ladder_extrapolate(rows, 4, &rms);
    double c3 = ladder_extrapolate(rows, 3, nullptr);
    // probed scaling: c0(a/q) = kappa q g(abar/q) => M/q^2 -> kappa^2 int g^2
    double kap2pi2 = out.kappa * out.kappa * kPi * kPi;
    out.h1_extrap = c4 / kap2pi2;
    out.h1_extrap_err = (std::abs(c4 - c3) + 2.0 * rms) / kap2pi2;

    out.agreed = std::abs(out.h1_quad - out.h1_extrap) <=
                 0.02 * std::max(out.h1_quad, out.h1_extrap);
    if (out.refine_diff > tol) out.agreed = false;
    return out;
}

// ------------------------------------------------------------------
// error term of the second moment
// ------------------------------------------------------------------

struct ErrorTerm {
    std::uint64_t q = 0;
    double M2 = 0.0;
    double M4 = 0.0;
    double E = 0.0;        // M2 - chat q^2
    double E_tilde = 0.0;  // mean g(a/q)^2 - int g^2
    double E_norm = 0.0;   // E / (q (log q)^2)
    double chat = 0.0;
    double h1_used = 0.0;
    double kappa_used = 0.0;
    std::uint64_t checksum = 0;
};

inline double leading_coefficient(const H1Reference& h1) {
    // chat = kappa^2 * int g^2 = kappa^2 * pi^2 * h1
    return h1.kappa * h1.kappa * kPi * kPi * h1.h1_quad;
}

inline ErrorTerm error_term(const C0Table& t, const H1Reference& h1) {
    if (!h1.agreed) throw probe_error("error_term: H1 reference did not pass its agreement gate");
    ErrorTerm e;
    e.q = t.q;
    MomentReport m2 = empirical_moment(t, 1);
    MomentReport m4 = empirical_moment(t, 2);
    e.M2 = m2.M;
    e.M4 = m4.M;
    e.h1_used = h1.h1_quad;
    e.kappa_used = h1.kappa;
    e.chat = leading_coefficient(h1);
    double q = double(t.q);
    e.E = e.M2 - e.chat * q * q;
    double mean_g2 = e.M2 / (h1.kappa * h1.kappa * q * q);
    e.E_tilde = mean_g2 - kPi * kPi * h1.h1_quad;
    double lq = std::log(q);
    e.E_norm = e.E / (q * lq * lq);
    e.checksum = t.checksum;
    return e;
}

// ------------------------------------------------------------------
// prime scan and power-law fit
// ------------------------------------------------------------------

inline constexpr const char* kScanCsvHeader =
    "q,M2,M4,E,E_tilde,E_norm,h1_used,kappa_used,checksum";

inline std::string scan_row_csv(const ErrorTerm& e) {
    char cs[24];
    std::snprintf(cs, sizeof(cs), "%016llx", static_cast<unsigned long long>(e.checksum));
    std::string s;
    s += std::to_string(e.q);
    for (double v : {e.M2, e.M4, e.E, e.E_tilde, e.E_norm, e.h1_used, e.kappa_used}) {
        s += ',';
        s += fp_str(v);
    }
    s += ',';
    s += cs;
    return s;
}

inline std::vector<ErrorTerm> error_scan(std::uint64_t prime_lo, std::uint64_t prime_hi,
                                         const H1Reference& h1, unsigned threads = 0,
                                         const std::string& cache_dir = {}) {
    auto primes = primes_in(prime_lo, prime_hi);
    std::vector<ErrorTerm> rows(primes.size());
    unsigned nt = threads ? threads : default_threads();
    parallel_for(primes.size(), nt, [&](std::size_t i) {
        C0Table t = c0_table_cached(primes[i], 1, cache_dir);
        rows[i] = error_term(t, h1);
    }, 1);
    return rows;
}

enum class FitModel { q_log2q };

struct FitResult {
    FitModel model = FitModel::q_log2q;
    double exponent = 0.0;    // slope of log|E| vs log(q (log q)^2)
    double constant = 0.0;    // exp(intercept)
    double resid_rms = 0.0;
    double resid_max = 0.0;
    double min_E_norm = 0.0;  // signed
    double max_E_norm = 0.0;
    double min_abs_E_norm = 0.0;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    std::uint64_t sign_threshold_q = 0;  // constant sign for q >= this
    std::uint64_t prime_lo = 0, prime_hi = 0;
    std::size_t n = 0;
};

inline FitResult scan_fit(const std::vector<ErrorTerm>& rows, FitModel model = FitModel::q_log2q) {
    if (rows.empty()) throw domain_error("scan_fit: empty prime range");
    FitResult f;
    f.model = model;
    f.n = rows.size();
    f.prime_lo = rows.front().q;
    f.prime_hi = rows.back().q;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    f.min_E_norm = rows.front().E_norm;
    f.max_E_norm = rows.front().E_norm;
    f.min_abs_E_norm = std::abs(rows.front().E_norm);
    for (const auto& r : rows) {
        f.min_E_norm = std::min(f.min_E_norm, r.E_norm);
        f.max_E_norm = std::max(f.max_E_norm, r.E_norm);
        f.min_abs_E_norm = std::min(f.min_abs_E_norm, std::abs(r.E_norm));
        (r.E > 0 ? f.n_positive : f.n_negative)++;
        if (r.E == 0) continue;
        double lq = std::log(double(r.q));
        double x = std::log(double(r.q) * lq * lq);
        double y = std::log(std::abs(r.E));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    if (n < 2) throw domain_error("scan_fit: not enough usable rows");
    double den = double(n) * sxx - sx * sx;
    f.exponent = (double(n) * sxy - sx * sy) / den;
    double intercept = (sy - f.exponent * sx) / double(n);
    f.constant = std::exp(intercept);
    for (const auto& r : rows) {
        if (r.E == 0) continue;
        double lq = std::log(double(r.q));
        double x = std::log(double(r.q) * lq * lq);
        double res = std::log(std::abs(r.E)) - (f.exponent * x + intercept);
        f.resid_rms += res * res;
        f.resid_max = std::max(f.resid_max, std::abs(res));
    }
    f.resid_rms = std::sqrt(f.resid_rms / double(n));
    // sign threshold: smallest q above which the sign never changes
    bool sign_last = rows.back().E > 0;
    f.sign_threshold_q = rows.front().q;
    for (std::size_t i = rows.size(); i-- > 0;) {
        if ((rows[i].E > 0) != sign_last) {
            f.sign_threshold_q = (i + 1 < rows.size()) ? rows[i + 1].q : rows[i].q;
            break;
        }
    }
    return f;
}

inline std::vector<ErrorTerm> scan_rows_from_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("scan csv: cannot open " + path);
    std::string line;
    std::vector<ErrorTerm> rows;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kScanCsvHeader) throw data_error("scan csv: bad header: " + line);
            header_seen = true;
            continue;
        }
        ErrorTerm e;
        std::istringstream ss(line);
        std::string tok;
        auto next = [&]() {
            if (!std::getline(ss, tok, ',')) throw data_error("scan csv: short row");
            return tok;
        };
        e.q = std::stoull(next());
        e.M2 = std::stod(next());
        e.M4 = std::stod(next());
        e.E = std::stod(next());
        e.E_tilde = std::stod(next());
        e.E_norm = std::stod(next());
        e.h1_used = std::stod(next());
        e.kappa_used = std::stod(next());
        e.checksum = std::stoull(next(), nullptr, 16);
        rows.push_back(e);
    }
    if (!header_seen) throw data_error("scan csv: missing header row");
    return rows;
}

// ------------------------------------------------------------------
// Sigma decomposition
// ------------------------------------------------------------------

struct SigmaReport {
    std::uint64_t q = 0;
    int K = 0;
    double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0, sigma4 = 0.0;
    // per k = 1..K: (|C_{k,1}|, |C_{k,2}|)
    std::vector<std::pair<std::uint64_t, std::uint64_t>> class_counts;
    double tol = 0.0;                 // relative stability under refinement
    double stability_diff[4] = {0, 0, 0, 0};
    std::uint64_t singular_points = 0;
    int dyadic_levels = 0;
    std::uint64_t dcap = 0;
};

struct SigmaParams {
    int dyadic_levels = 40;
    int refine_extra = 16;        // added levels for the stability run
    double adapt_tol = 1e-10;
    std::uint64_t dcap_mult = 2;  // denominator cap = dcap_mult * q
    unsigned threads = 0;
    bool stability_run = true;
};

namespace detail {

// gamma_k(x) for k = 0..K from a fast orbit, zero-padded past termination
inline void gamma_vector(double x, int K, std::vector<double>& out) {
    out.assign(std::size_t(K) + 1, 0.0);
    double al = x, beta_prev = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (al <= 0.0) break;
        out[std::size_t(k)] = beta_prev * std::log(1.0 / al);
        beta_prev *= al;
        double inv = 1.0 / al;
        al = inv - std::floor(inv);
    }
}

// same from the exact orbit of a rational (values for k < depth, 0 beyond)
inline void gamma_vector(const BigRat& x, int K, std::vector<double>& out) {
    out.assign(std::size_t(K) + 1, 0.0);
    Orbit ob = orbit(x, K);
    for (int k = 0; k < ob.size() && k <= K; ++k) out[std::size_t(k)] = ob.gamma(k);
}

struct SigmaCellResult {
    double s[4] = {0, 0, 0, 0};
    std::uint64_t nsing = 0;
};

inline SigmaCellResult sigma_interval(std::uint64_t q, std::uint64_t a, int K,
                                      const SigmaParams& sp, int levels) {
    const BigRat center = make_rational(BigInt(a), BigInt(q));
    const BigRat lo = center - BigRat(1, 2 * int64_t(q));
    const BigRat hi = center + BigRat(1, 2 * int64_t(q));

    std::vector<double> gam_c;
    gamma_vector(center, K, gam_c);
    HValue hc = h_func(center);

    auto scan = depth_scan(lo, hi, K, BigInt(std::int64_t(sp.dcap_mult * q)));
    std::vector<double> cuts;
    cuts.push_back(to_double(lo));
    for (const auto& r : scan.points) cuts.push_back(to_double(r));
    cuts.push_back(to_double(hi));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    PanelParams pp{levels, 10, sp.adapt_tol, 32.0};
    VecAccum<4> acc;
    std::vector<double> gam;
    auto integrand = [&](double x, std::array<double, 4>& out) {
        gamma_vector(x, K, gam);
        double ds_plain = 0, ds_alt = 0, ds_sq = 0, d1 = 0;
        for (int k = 1; k <= K; ++k) {
            double gk = gam[std::size_t(k)], gc = gam_c[std::size_t(k)];
            d1 += gk * gk - gc * gc;
            double d = gk - gc;
            ds_plain += d;
            ds_alt += (k & 1) ? -d : d;
            ds_sq += d * d;
        }
        HValue hx = h_func(x);
        double dH = hx.value - hc.value;
        out[0] = d1;
        out[1] = 0.5 * (ds_alt * ds_alt - ds_sq);
        out[2] = dH * ds_plain;
        out[3] = dH * dH;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        integrate_singular_gap<4>(integrand, cuts[i], cuts[i + 1], pp, acc);

    SigmaCellResult out;
    auto v = acc.value();
    for (int j = 0; j < 4; ++j) out.s[j] = v[std::size_t(j)];
    out.s[3] *= double(K);  // printed definition repeats the H term for each k
    out.nsing = scan.points.size();
    return out;
}

} // namespace detail

inline SigmaReport sigma_terms(std::uint64_t q, int K, const SigmaParams& sp = {}) {
    if (!is_prime(q)) throw domain_error("sigma_terms: q must be prime");
    if (K < 0 || double(K) > 2.0 * std::log(double(q)) + 1.0)
        throw domain_error("sigma_terms: K out of range (0 <= K <= 2 log q)");
    SigmaReport rep;
    rep.q = q;
    rep.K = K;
    rep.dyadic_levels = sp.dyadic_levels;
    rep.dcap = sp.dcap_mult * q;

    if (K >= 1) {
        unsigned threads = sp.threads ? sp.threads : default_threads();
        auto run = [&](int levels, double out[4]) {
            std::vector<detail::SigmaCellResult> cells(q - 1);
            parallel_for(q - 1, threads, [&](std::size_t i) {
                cells[i] = detail::sigma_interval(q, i + 1, K, sp, levels);
            }, 1);
            std::uint64_t ns = 0;
            for (auto& c : cells) ns += c.nsing;
            rep.singular_points = ns;
            for (int j = 0; j < 4; ++j)
                out[j] = blocked_sum(cells.size(),
                                     [&](std::size_t i) { return cells[i].s[j]; });
        };
        double base[4];
        run(sp.dyadic_levels, base);
        rep.sigma1 = base[0];
        rep.sigma2 = base[1];
        rep.sigma3 = base[2];
        rep.sigma4 = base[3];
        if (sp.stability_run) {
            double fine[4];
            run(sp.dyadic_levels + sp.refine_extra, fine);
            double rel = 0;
            for (int j = 0; j < 4; ++j) {
                rep.stability_diff[j] = std::abs(fine[j] - base[j]);
                double scale = std::max(std::abs(base[j]), 1e-30);
                rel = std::max(rel, rep.stability_diff[j] / scale);
            }
            rep.tol = rel;
            rep.sigma1 = fine[0];
            rep.sigma2 = fine[1];
            rep.sigma3 = fine[2];
            rep.sigma4 = fine[3];
        }
    }

    auto flags = grid_depth_flags(q, std::max(K, 1));
    rep.class_counts.assign(std::size_t(std::max(K, 0)), {0, 0});
    for (int k = 1; k <= K; ++k) {
        std::uint64_t c1 = 0, c2 = 0;
        for (std::uint64_t a = 0; a < q; ++a) {
            bool has = flags.interval_contains(a, k) || flags.interval_contains(a + 1, k);
            (has ? c2 : c1)++;
        }
        rep.class_counts[std::size_t(k - 1)] = {c1, c2};
    }
    return rep;
}

// ------------------------------------------------------------------
// moment growth
// ------------------------------------------------------------------

struct MomentGrowth {
    std::vector<int> K;
    std::vector<double> integral;  // int |g|^K
    std::vector<double> ratio;     // integral / ((e^gamma/pi) K!)
};

inline MomentGrowth moment_growth(int K_max, const GPowParams& gp = {}) {
    if (K_max < 2 || K_max > kGPowMax)
        throw domain_error("moment_growth: 2 <= K_max <= 8");
    auto ints = g_pow_integrals(gp);
    MomentGrowth mg;
    const double scale = std::exp(kEuler) / kPi;
    for (int K = 2; K <= K_max; ++K) {
        mg.K.push_back(K);
        mg.integral.push_back(ints[std::size_t(K - 1)]);
        mg.ratio.push_back(ints[std::size_t(K - 1)] / (scale * std::tgamma(double(K) + 1.0)));
    }
    return mg;
}

} // namespace cotmom

#endif
