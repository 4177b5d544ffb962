#ifndef COTMOM_DEPTHSCAN_HPP
#define COTMOM_DEPTHSCAN_HPP

// Exact queries about rationals of given CF depth inside an interval:
//  - which depths k <= K occur in the open interval (depth-k rationals
//    accumulate at every rational of lower depth, so "contains" needs cell
//    logic, not point listing)
//  - the finite list of depth<=K rationals with denominator <= dcap, used
//    as mandatory quadrature subdivision points.
//
// Both walk the cell tree.  Facts used: the open cell of depth d contains
// rationals of every depth >= d+1 and none of depth <= d; the child cells
// C(prefix, b) tile the prefix cell and march monotonically toward its
// vertex [0;prefix] as b grows; the endpoint [0;prefix,b] has canonical
// depth d+1 exactly when b >= 2 (b = 1 collapses to the bumped parent
// endpoint, which belongs one level up).

#include <algorithm>
#include <set>
#include <vector>

#include "cf.hpp"
#include "common.hpp"

namespace cotmom {

struct DepthScanResult {
    std::vector<bool> depth_present;  // index k = 1..K
    std::vector<BigRat> points;       // depth<=K rationals, den <= dcap, sorted
};

namespace detail {

inline BigInt floor_rat(const BigRat& x) {
    BigInt n = boost::multiprecision::numerator(x);
    BigInt d = boost::multiprecision::denominator(x);
    BigInt q = n / d;
    if (n < 0 && q * d != n) --q;
    return q;
}

struct DepthScanner {
    BigRat lo, hi;  // open target interval
    int K = 0;
    BigInt dcap;
    std::vector<bool> present;
    std::set<BigRat> pts;

    bool inside(const BigRat& x) const { return lo < x && x < hi; }

    void mark_from(int dmin) {
        for (int k = std::max(1, dmin); k <= K; ++k) present[std::size_t(k)] = true;
    }

    void note_point(const BigRat& x, int depth) {
        if (!inside(x)) return;
        if (depth <= K) present[std::size_t(depth)] = true;
        if (boost::multiprecision::denominator(x) <= dcap) pts.insert(x);
    }

    // Visit the children of the prefix cell (convergents pm1/qm1, p/q at
    // depth d).  Caller guarantees the open prefix cell meets (lo,hi).
    void visit(const BigInt& pm1, const BigInt& qm1, const BigInt& p, const BigInt& q,
               int d) {
        auto x_of = [&](const BigInt& b) {
            return make_rational(b * p + pm1, b * q + qm1);
        };
        const BigRat vertex = (d == 0) ? BigRat(0) : make_rational(p, q);
        const BigRat e1 = x_of(BigInt(1));  // bumped parent endpoint
        const BigRat cell_lo = std::min(e1, vertex), cell_hi = std::max(e1, vertex);
        const BigRat ylo = std::max(lo, cell_lo), yhi = std::min(hi, cell_hi);
        if (!(ylo < yhi)) return;

        // smallest candidate child index: invert b = (pm1 - qm1 y)/(q y - p)
        // at whichever clamped endpoint avoids the pole y = vertex
        BigInt b0(1);
        {
            BigInt best(-1);
            for (const BigRat& y : {ylo, yhi}) {
                BigRat den = BigRat(q) * y - BigRat(p);
                if (d == 0) den = y;  // root: children are (1/(b+1), 1/b)
                if (den == 0) continue;
                BigRat t = (BigRat(pm1) - BigRat(qm1) * y) / den;
                BigInt fb = floor_rat(t) - 1;
                if (best < 0 || fb < best) best = fb;
            }
            if (best > 1) b0 = best;
        }

        bool seen = false;
        for (BigInt b = b0;; ++b) {
            BigRat eb = x_of(b), eb1 = x_of(b + 1);
            BigRat clo = std::min(eb, eb1), chi = std::max(eb, eb1);
            bool intersects = (clo < hi && lo < chi);
            if (!intersects) {
                if (seen) break;  // children march monotonically; done
                continue;
            }
            seen = true;

            if (b >= 2) note_point(eb, d + 1);
            note_point(eb1, d + 1);

            const bool full = (lo <= clo && chi <= hi);
            const BigInt q_child = b * q + qm1;
            if (full && d + 1 < K) mark_from(d + 2);

            const bool want_points_below = (q_child <= dcap);
            if (d + 1 < K && (!full || want_points_below))
                visit(p, q, b * p + pm1, q_child, d + 1);

            // once a child is fully inside, all further children are nested
            // toward the vertex and also fully inside; when their endpoints
            // can no longer satisfy the denominator cap, nothing new remains
            if (full && !want_points_below) break;
        }
    }
};

} // namespace detail

// Scan the open interval (lo,hi), clamped to (0,1): which CF depths k <= K
// have a rational inside, plus all depth<=K rationals with den <= dcap.
inline DepthScanResult depth_scan(const BigRat& lo_in, const BigRat& hi_in, int K,
                                  const BigInt& dcap) {
    detail::DepthScanner sc;
    sc.lo = std::max(lo_in, BigRat(0));
    sc.hi = std::min(hi_in, BigRat(1));
    sc.K = K;
    sc.dcap = dcap;
    sc.present.assign(std::size_t(K) + 1, false);
    if (sc.lo < sc.hi && K >= 1)
        sc.visit(BigInt(1), BigInt(0), BigInt(0), BigInt(1), 0);
    DepthScanResult out;
    out.depth_present = sc.present;
    out.points.assign(sc.pts.begin(), sc.pts.end());
    return out;
}

// Depth with boundary conventions: depth(1) = 1 (via [0;1]); 0 has none.
inline int depth_or_zero(const BigRat& x) {
    if (x == 0) return 0;
    if (x == 1) return 1;
    if (!in_unit_open(x)) throw domain_error("depth_or_zero: x in [0,1]");
    return depth_of(x);
}

// For each k = 1..K and a = 0..q-1: does the closed interval
// I_a = [a/q,(a+1)/q] contain a rational of depth k (indices mod q; the
// wrap interval I_q is I_0 shifted by one period).
struct GridDepthFlags {
    std::uint64_t q = 0;
    int K = 0;
    std::vector<std::vector<bool>> contains;  // [a][k]

    bool interval_contains(std::uint64_t a, int k) const {
        return contains[std::size_t(a % q)][std::size_t(k)];
    }
};

inline GridDepthFlags grid_depth_flags(std::uint64_t q, int K) {
    GridDepthFlags g;
    g.q = q;
    g.K = K;
    g.contains.assign(q, std::vector<bool>(std::size_t(K) + 1, false));
    for (std::uint64_t a = 0; a < q; ++a) {
        BigRat lo = make_rational(BigInt(a), BigInt(q));
        BigRat hi = make_rational(BigInt(a + 1), BigInt(q));
        auto scan = depth_scan(lo, hi, K, BigInt(1));
        for (int k = 1; k <= K; ++k)
            g.contains[a][std::size_t(k)] = scan.depth_present[std::size_t(k)];
        for (const BigRat& e : {lo, hi}) {
            int dd = depth_or_zero(e);
            if (dd >= 1 && dd <= K) g.contains[a][std::size_t(dd)] = true;
        }
    }
    return g;
}

} // namespace cotmom

#endif
