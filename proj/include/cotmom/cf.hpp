#ifndef COTMOM_CF_HPP
#define COTMOM_CF_HPP

// Exact continued-fraction arithmetic: expansions, convergents, Gauss-map
// orbits (alpha/beta/gamma sequences), cells of the CF partition, and the
// adjacent cell pair of a rational endpoint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace cotmom {

// ------------------------------------------------------------------
// Rational helpers
// ------------------------------------------------------------------

inline BigRat make_rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw domain_error("rational: zero denominator");
    return BigRat(num, den);  // cpp_rational normalizes sign and gcd
}

inline BigRat parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return BigRat(BigInt(s));
        BigInt n(s.substr(0, slash));
        BigInt d(s.substr(slash + 1));
        return make_rational(n, d);
    } catch (const std::exception&) {
        throw domain_error("cannot parse rational: " + s);
    }
}

// exact dyadic rational equal to the double x
inline BigRat dyadic_from_double(double x) {
    if (!std::isfinite(x)) throw domain_error("non-finite input");
    int e;
    double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [0.5,1)
    auto mi = static_cast<std::int64_t>(std::ldexp(m, 53));
    int sh = e - 53;
    BigInt num(mi), den(1);
    if (sh >= 0)
        num <<= sh;
    else
        den <<= -sh;
    return make_rational(num, den);
}

inline bool in_unit_open(const BigRat& x) { return x > 0 && x < 1; }

// ------------------------------------------------------------------
// Expansion and convergents
// ------------------------------------------------------------------

// Canonical expansion x = [0; a_1, ..., a_K]; last quotient >= 2 when K >= 2,
// so depth (= K) is well defined.
struct CFExpansion {
    std::vector<BigInt> quotients;
    int depth() const { return static_cast<int>(quotients.size()); }
};

struct ConvergentSeq {
    // pairs (p_k, q_k), k = 0..K;  p_0/q_0 = 0/1
    std::vector<BigInt> p, q;
    int last() const { return static_cast<int>(p.size()) - 1; }
};

inline CFExpansion cf_expand(const BigRat& x) {
    if (!in_unit_open(x)) throw domain_error("cf_expand: x must lie in (0,1)");
    CFExpansion cf;
    // Euclid on (den, num); remainders strictly decrease, so the final
    // quotient is >= 2 whenever K >= 2 (canonical form for free).
    BigInt a = boost::multiprecision::denominator(x);
    BigInt b = boost::multiprecision::numerator(x);
    while (b != 0) {
        BigInt qk = a / b;
        BigInt r = a % b;
        cf.quotients.push_back(qk);
        a = b;
        b = r;
    }
    return cf;
}

inline ConvergentSeq convergents(const CFExpansion& cf) {
    ConvergentSeq cs;
    const auto K = cf.quotients.size();
    cs.p.resize(K + 1);
    cs.q.resize(K + 1);
    cs.p[0] = 0;
    cs.q[0] = 1;
    for (std::size_t k = 1; k <= K; ++k) {
        const BigInt& ak = cf.quotients[k - 1];
        if (ak < 1) throw domain_error("convergents: quotients must be >= 1");
        if (k == 1) {
            cs.p[1] = 1;
            cs.q[1] = ak;
        } else {
            cs.p[k] = ak * cs.p[k - 1] + cs.p[k - 2];
            cs.q[k] = ak * cs.q[k - 1] + cs.q[k - 2];
        }
    }
    return cs;
}

inline BigRat reconstruct(const CFExpansion& cf) {
    if (cf.quotients.empty()) throw domain_error("reconstruct: empty expansion");
    auto cs = convergents(cf);
    return make_rational(cs.p.back(), cs.q.back());
}

inline int depth_of(const BigRat& x) { return cf_expand(x).depth(); }

inline std::string cf_to_string(const CFExpansion& cf) {
    std::string s = "[0;";
    for (std::size_t i = 0; i < cf.quotients.size(); ++i) {
        if (i) s += ',';
        s += cf.quotients[i].str();
    }
    s += ']';
    return s;
}

// ------------------------------------------------------------------
// Gauss-map orbits
// ------------------------------------------------------------------

// One orbit step record.  For rational x of depth K the gamma sequence ends
// at k = K-1 (alpha_K = 0 makes gamma_K undefined).
struct OrbitSample {
    int k;
    double alpha;  // alpha_k
    double beta;   // beta_k = alpha_0 ... alpha_k
    double gamma;  // gamma_k = beta_{k-1} log(1/alpha_k)
};

struct Orbit {
    std::vector<OrbitSample> samples;
    double x = 0;
    int depth_limit = 0;
    bool truncated_at_depth = false;  // set when a rational orbit ended before kmax
    std::vector<BigRat> alpha_exact;  // filled on the exact path

    int size() const { return static_cast<int>(samples.size()); }
    double beta(int k) const {  // beta_{-1} = 1
        return k < 0 ? 1.0 : samples.at(static_cast<std::size_t>(k)).beta;
    }
    double gamma(int k) const { return samples.at(static_cast<std::size_t>(k)).gamma; }
};

// Exact-rational orbit: alpha_k computed by exact arithmetic, converted to
// double only in the outputs.  Stops after gamma_{K-1}.
inline Orbit orbit(const BigRat& x0, int kmax) {
    if (!in_unit_open(x0)) throw domain_error("orbit: x must lie in (0,1)");
    Orbit ob;
    ob.x = to_double(x0);
    ob.depth_limit = kmax;
    BigRat al = x0;
    double beta_prev = 1.0;
    for (int k = 0; k <= kmax; ++k) {
        if (al == 0) {
            ob.truncated_at_depth = true;
            break;
        }
        double ad = to_double(al);
        double gamma = beta_prev * std::log(1.0 / ad);
        double beta = beta_prev * ad;
        ob.samples.push_back({k, ad, beta, gamma});
        ob.alpha_exact.push_back(al);
        beta_prev = beta;
        // alpha_{k+1} = {1/alpha_k}
        BigRat inv = BigRat(boost::multiprecision::denominator(al),
                            boost::multiprecision::numerator(al));
        BigInt fl = boost::multiprecision::numerator(inv) /
                    boost::multiprecision::denominator(inv);
        al = inv - BigRat(fl);
    }
    return ob;
}

enum class OrbitMode { fast, exact_dyadic, extended };

// Floating-input orbit.  fast: plain double Gauss iteration (the per-step
// relative error is amplified by ~q_k^2, which only matters past the point
// where beta_k has decayed below ~1e-8; fine for evaluation work).
// exact_dyadic: treats the double as the exact rational it is.
// extended: 50-digit floating iteration, for validation.
Orbit orbit(double x, int kmax, OrbitMode mode = OrbitMode::fast);

namespace detail {
inline Orbit orbit_fast(double x, int kmax) {
    if (!(x > 0.0 && x < 1.0)) throw domain_error("orbit: x must lie in (0,1)");
    Orbit ob;
    ob.x = x;
    ob.depth_limit = kmax;
    double al = x, beta_prev = 1.0;
    for (int k = 0; k <= kmax; ++k) {
        if (al <= 0.0) {
            ob.truncated_at_depth = true;
            break;
        }
        double gamma = beta_prev * std::log(1.0 / al);
        double beta = beta_prev * al;
        ob.samples.push_back({k, al, beta, gamma});
        beta_prev = beta;
        double inv = 1.0 / al;
        al = inv - std::floor(inv);
    }
    return ob;
}
} // namespace detail

inline Orbit orbit(double x, int kmax, OrbitMode mode) {
    switch (mode) {
        case OrbitMode::fast:
            return detail::orbit_fast(x, kmax);
        case OrbitMode::exact_dyadic: {
            Orbit ob = orbit(dyadic_from_double(x), kmax);
            ob.x = x;
            return ob;
        }
        case OrbitMode::extended:
            break;
    }
    // extended precision path lives in cf_extended.hpp to keep this header light
    throw domain_error("orbit: extended mode requires cf_extended.hpp (orbit_extended)");
}

// ------------------------------------------------------------------
// Cells
// ------------------------------------------------------------------

// Open interval of all points sharing the partial quotients b_1..b_k.
struct Cell {
    std::vector<BigInt> label;
    BigRat lo, hi;
    int depth() const { return static_cast<int>(label.size()); }
    bool contains(const BigRat& x) const { return lo < x && x < hi; }
};

inline BigRat eval_label(const std::vector<BigInt>& label) {
    CFExpansion cf;
    cf.quotients = label;
    return reconstruct(cf);
}

inline Cell cell_interval(const std::vector<BigInt>& label) {
    if (label.empty()) throw domain_error("cell_interval: empty label");
    for (const auto& b : label)
        if (b < 1) throw domain_error("cell_interval: labels must be positive");
    Cell c;
    c.label = label;
    BigRat e1 = eval_label(label);
    auto bumped = label;
    bumped.back() += 1;
    BigRat e2 = eval_label(bumped);
    c.lo = std::min(e1, e2);
    c.hi = std::max(e1, e2);
    return c;
}

// The unique depth-k cell whose open interval contains x; the label equals
// the first k partial quotients of x.  Rejects x that is a cell endpoint
// (rational of depth <= k).
inline Cell locate(const BigRat& x, int k) {
    if (k < 1) throw domain_error("locate: k must be >= 1");
    if (!in_unit_open(x)) throw domain_error("locate: x must lie in (0,1)");
    CFExpansion cf = cf_expand(x);
    if (cf.depth() <= k)
        throw domain_error("locate: x is a rational of depth <= k (cell endpoint)");
    std::vector<BigInt> label(cf.quotients.begin(), cf.quotients.begin() + k);
    Cell c = cell_interval(label);
    if (!c.contains(x)) throw domain_error("locate: endpoint hit");
    return c;
}

inline Cell locate(double x, int k) { return locate(dyadic_from_double(x), k); }

// ------------------------------------------------------------------
// Adjacent cell pair of a rational endpoint
// ------------------------------------------------------------------

// For r = [0; b_1..b_k] (depth k >= 2): c1 is the depth-k cell with endpoint
// r and c2 the unique depth-(k+1) cell with endpoint r on the opposite side.
// c2 is found by searching candidate labels rather than trusting a fixed
// formula; the search result is verified for adjacency and disjointness.
struct CellPair {
    Cell c1, c2;
    BigRat r;
};

inline CellPair neighbor_pair(const BigRat& r) {
    if (!in_unit_open(r)) throw domain_error("neighbor_pair: r must lie in (0,1)");
    CFExpansion cf = cf_expand(r);
    const int k = cf.depth();
    if (k < 2) throw domain_error("neighbor_pair: depth must be >= 2");

    CellPair pr;
    pr.r = r;
    pr.c1 = cell_interval(cf.quotients);

    // candidate depth-(k+1) labels: (b_1..b_k - 1, 1) and (b_1..b_k - 1, 2)
    std::vector<std::vector<BigInt>> cands;
    {
        auto base = cf.quotients;
        base.back() -= 1;  // >= 1 since b_k >= 2 in canonical form
        for (int last = 1; last <= 2; ++last) {
            auto lab = base;
            lab.push_back(last);
            cands.push_back(lab);
        }
    }
    std::optional<Cell> found;
    for (const auto& lab : cands) {
        Cell c = cell_interval(lab);
        if (c.lo != r && c.hi != r) continue;
        // must lie on the opposite side of r from c1
        bool c1_right = (pr.c1.lo == r);
        bool c_left = (c.hi == r);
        if (c1_right != c_left) continue;
        if (found) throw domain_error("neighbor_pair: ambiguous candidate set");
        found = c;
    }
    if (!found) throw domain_error("neighbor_pair: no adjacent deeper cell found");
    pr.c2 = *found;
    return pr;
}

// ------------------------------------------------------------------
// Derivative diagnostics inside a cell
// ------------------------------------------------------------------

// Central-difference check of the closed-form derivatives of alpha_k and
// gamma_k inside a depth-k cell.  Two closed forms are evaluated for
// gamma_k': the one with coefficient q_{k+1} on the log term, and the
// variant with q_{k-1}.  Callers compare against fd_* and report; see the
// module tests.
struct DerivativeDiag {
    double fd_alpha, closed_alpha;
    double fd_gamma, closed_gamma_qk1, closed_gamma_qkm1;
};

inline DerivativeDiag lemma_derivative_diag(double x, int k, double h = 1e-7) {
    auto orb = [&](double t) { return detail::orbit_fast(t, k + 2); };
    Orbit om = orb(x - h), op = orb(x + h), oc = orb(x);
    if (oc.size() <= k + 1 || om.size() <= k + 1 || op.size() <= k + 1)
        throw domain_error("derivative diag: orbit too short");
    DerivativeDiag d{};
    d.fd_alpha = (op.samples[k].alpha - om.samples[k].alpha) / (2 * h);
    d.fd_gamma = (op.samples[k].gamma - om.samples[k].gamma) / (2 * h);

    Cell cell = locate(x, std::max(1, k));
    CFExpansion cf;
    cf.quotients = cell.label;
    // extend by the next two quotients of x so q_{k+1} is available
    Orbit full = detail::orbit_fast(x, k + 2);
    for (int j = k; j <= k + 1; ++j)
        cf.quotients.push_back(BigInt(static_cast<long long>(
            std::floor(1.0 / full.samples[static_cast<std::size_t>(j)].alpha))));
    ConvergentSeq cs = convergents(cf);
    double qk = static_cast<double>(cs.q[static_cast<std::size_t>(k)]);
    double qkm1 = static_cast<double>(cs.q[static_cast<std::size_t>(k - 1 >= 0 ? k - 1 : 0)]);
    double qk1 = static_cast<double>(cs.q[static_cast<std::size_t>(k + 1)]);
    double ak = oc.samples[static_cast<std::size_t>(k)].alpha;
    double bk = oc.samples[static_cast<std::size_t>(k)].beta;
    double sgn = (k % 2 == 0) ? 1.0 : -1.0;

    d.closed_alpha = sgn * (qk + ak * qkm1) * (qk + ak * qkm1);
    d.closed_gamma_qk1 = -sgn * (qk1 * std::log(1.0 / ak) + 1.0 / bk);
    d.closed_gamma_qkm1 = -sgn * (qkm1 * std::log(1.0 / ak) + 1.0 / bk);
    return d;
}

} // namespace cotmom

#endif
