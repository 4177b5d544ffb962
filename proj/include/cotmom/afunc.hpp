#ifndef COTMOM_AFUNC_HPP
#define COTMOM_AFUNC_HPP

// The correction kernel behind the Wilton representation of g:
//
//   A(lambda) = int_0^inf {t}{lambda t} / t^2 dt          (lambda in [0,1])
//   F(x)      = (x+1)/2 * A(1) - A(x) - x/2 * log x
//
// a_integral is the defining route: exact closed-form integration between
// consecutive breakpoints of {t} and {lambda t} up to a cutoff T, plus the
// equidistribution tail 1/(4T).  a_fast adds two exact sawtooth tails
// (digamma closed forms) and the near-resonant part of the oscillatory
// cross term, which brings the cutoff down to T=2048 at ~2e-7 absolute
// error.  F evaluation for the g machinery goes through an adaptive
// piecewise-cubic table (FGrid); A has mild x*log x cusps at every rational
// with strength 1/(2*numerator), so the table refines near those points.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <vector>

#include "cache.hpp"
#include "common.hpp"
#include "parallel.hpp"
#include "summation.hpp"

namespace cotmom {

// ------------------------------------------------------------------
// special functions
// ------------------------------------------------------------------

inline double digamma(double x) {
    // recurrence up, then asymptotic series
    double r = 0.0;
    while (x < 8.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    double x2 = 1.0 / (x * x);
    // psi(x) ~ ln x - 1/(2x) - sum B_2n/(2n x^(2n))
    return r + std::log(x) - 0.5 / x -
           x2 * (1.0 / 12 - x2 * (1.0 / 120 - x2 * (1.0 / 252 - x2 * (1.0 / 240 - x2 / 132.0 * 0.0))));
}

inline double sine_integral(double y) {
    // Si(y) = int_0^y sin t / t dt, y >= 0
    if (y <= 20.0) {
        double term = y, sum = y;
        double y2 = y * y;
        for (int k = 1; k < 64; ++k) {
            term *= -y2 / ((2.0 * k) * (2.0 * k + 1.0));
            double add = term / (2.0 * k + 1.0);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    // asymptotic auxiliaries: Si = pi/2 - f cos - g sin
    double iy = 1.0 / y, iy2 = iy * iy;
    double f = iy * (1.0 - iy2 * (2.0 - iy2 * (24.0 - iy2 * (720.0 - iy2 * 40320.0))));
    double g = iy2 * (1.0 - iy2 * (6.0 - iy2 * (120.0 - iy2 * (5040.0 - iy2 * 362880.0))));
    return kPi / 2 - f * std::cos(y) - g * std::sin(y);
}

// ------------------------------------------------------------------
// tails
// ------------------------------------------------------------------

// Psi(X) = int_X^inf ({u} - 1/2)/u^2 du, exact via digamma.
inline double sawtooth_tail(double X) {
    if (X <= 0) throw domain_error("sawtooth_tail: X must be positive");
    double c = std::ceil(X);
    double S = 0.5 * (digamma(c) + digamma(c + 1.0)) - std::log(c);
    if (c > X) S += std::log(c / X) - (c - 0.5) * (1.0 / X - 1.0 / c);
    return S;
}

// G(y) = int_1^inf cos(y s)/s^2 ds = cos y - y (pi/2 - Si(y))
inline double cosine_tail(double y) {
    return std::cos(y) - y * (kPi / 2 - sine_integral(y));
}

// ------------------------------------------------------------------
// A(lambda)
// ------------------------------------------------------------------

namespace detail {

// int_0^T {t}{lambda t}/t^2 dt, exact between breakpoints.
inline double a_segments(double lam, double T) {
    KahanSum acc;
    double t0 = 0.0;
    long long n = 0;             // floor(t) on the current segment
    long long m = 0;             // floor(lam t)
    double next_int = 1.0;
    double next_mul = (lam > 0) ? 1.0 / lam : std::numeric_limits<double>::infinity();
    while (t0 < T) {
        double t1 = std::min({next_int, next_mul, T});
        if (t1 > t0) {
            // integrand (t-n)(lam t-m)/t^2 = lam - (m+lam n)/t + n m/t^2
            double dt = t1 - t0;
            double seg = lam * dt;
            if (t0 > 0.0) {
                if (m + n > 0)
                    seg -= (double(m) + lam * double(n)) * std::log1p(dt / t0);
                if (n > 0 && m > 0)
                    seg += double(n) * double(m) * (1.0 / t0 - 1.0 / t1);
            }
            acc.add(seg);
        }
        t0 = t1;
        if (t1 == next_int) {
            ++n;
            next_int = double(n) + 1.0;
        }
        if (t1 == next_mul) {
            ++m;
            next_mul = double(m + 1) / lam;
        }
    }
    return acc.value();
}

} // namespace detail

struct AValue {
    double value;
    double err_bound;
};

// Defining evaluation: exact segments to T plus the mean-value tail 1/(4T).
// Residual after the correction is O(1/T); the worst case observed is
// 1/(12T) at lambda = 1.
inline AValue a_integral(double lam, double T) {
    if (lam < 0.0 || lam > 1.0)
        throw domain_error("a_integral: lambda must lie in [0,1]");
    if (T < 10.0) throw domain_error("a_integral: cutoff too small (T >= 10)");
    if (lam == 0.0) return {0.0, 0.0};
    double v = detail::a_segments(lam, T) + 1.0 / (4.0 * T);
    return {v, 1.0 / T};
}

// Accelerated evaluation.  Exact segments to a small cutoff; tails:
//   {t}{lt} = 1/4 + psi(t)/2 + psi(lt)/2 + psi(t)psi(lt)
// The first three integrate in closed form.  Of the cross term only
// near-resonant frequency pairs m ~ n*lambda survive above ~1e-8; they are
// located by a direct scan and integrated via cosine_tail.
inline double a_fast(double lam, double T = 2048.0) {
    if (lam < 0.0 || lam > 1.0)
        throw domain_error("a_fast: lambda must lie in [0,1]");
    if (lam == 0.0) return 0.0;
    double v = detail::a_segments(lam, T) + 1.0 / (4.0 * T);
    v += 0.5 * sawtooth_tail(T) + 0.5 * lam * sawtooth_tail(lam * T);

    constexpr int kResScan = 2000;
    constexpr double kYCut = 60.0;
    KahanSum corr;
    for (int n = 1; n <= kResScan; ++n) {
        double nl = n * lam;
        double m = std::nearbyint(nl);
        if (m < 1.0) continue;
        double y = 2 * kPi * std::abs(m - nl) * T;
        if (y >= kYCut) continue;
        corr.add(cosine_tail(y) / (double(n) * m));
    }
    v += corr.value() / (2 * kPi * kPi * T);
    return v;
}

// A(1) = int_0^inf ({t}/t)^2 dt.  At lambda = 1 the cross term is the exact
// diagonal sum zeta(2)/(2 pi^2 T) = 1/(12T), so a large cutoff gives nearly
// machine accuracy.
inline double a1_constant() {
    static const double a1 = [] {
        const double T = 1e5;
        double v = detail::a_segments(1.0, T) + 1.0 / (4.0 * T) + sawtooth_tail(T) +
                   1.0 / (12.0 * T);
        return v;
    }();
    return a1;
}

// F(x) on [0,1]; F(0+) = A(1)/2, F(1) = 0.
inline double f_func(double x) {
    if (x < 0.0 || x > 1.0) throw domain_error("f_func: x must lie in [0,1]");
    if (x == 0.0) return 0.5 * a1_constant();
    return 0.5 * (x + 1.0) * a1_constant() - a_fast(x) - 0.5 * x * std::log(x);
}

// Memoized A evaluations keyed by (lambda, cutoff); concurrent readers,
// single writer.
class AIntegralCache {
public:
    double a1() const { return a1_constant(); }

    AValue at(double lam, double T) {
        const auto key = std::make_pair(lam, T);
        {
            std::shared_lock rd(mu_);
            auto it = memo_.find(key);
            if (it != memo_.end()) return it->second;
        }
        AValue v = a_integral(lam, T);
        std::unique_lock wr(mu_);
        memo_.emplace(key, v);
        return v;
    }

private:
    mutable std::shared_mutex mu_;
    std::map<std::pair<double, double>, AValue> memo_;
};

// ------------------------------------------------------------------
// FGrid: adaptive piecewise-cubic table of F on [1/600, 1]
// ------------------------------------------------------------------

class FGrid {
public:
    static constexpr double kXMin = 1.0 / 600.0;
    static constexpr double kTol = 1.2e-6;
    static constexpr double kMinWidth = 1.2e-5;
    static constexpr const char* kMagic = "FGRID01";

    struct Panel {
        double a, b;
        double c[4];  // cubic in t = (x-a)/(b-a)
    };

    void build(unsigned threads) {
        std::vector<std::pair<double, double>> work;  // [a,b) intervals
        double x = kXMin;
        while (x < 1.0 / 16.0) {
            double w = std::max(x * x / 4.0, kMinWidth);
            work.emplace_back(x, std::min(x + w, 1.0 / 16.0));
            x += w;
        }
        const int n16 = 240;
        for (int i = 0; i < n16; ++i)
            work.emplace_back(1.0 / 16.0 + (i) * (15.0 / 16.0) / n16,
                              1.0 / 16.0 + (i + 1) * (15.0 / 16.0) / n16);

        std::vector<Panel> done;
        while (!work.empty()) {
            // evaluate all samples of this wave in parallel
            std::vector<double> xs;
            xs.reserve(work.size() * 7);
            for (auto& [a, b] : work)
                for (int j = 0; j < 7; ++j) xs.push_back(a + (b - a) * kSampleT[j]);
            std::vector<double> fv(xs.size());
            parallel_for(xs.size(), threads, [&](std::size_t i) { fv[i] = f_func(xs[i]); }, 8);

            std::vector<std::pair<double, double>> next;
            for (std::size_t w = 0; w < work.size(); ++w) {
                auto [a, b] = work[w];
                const double* f = fv.data() + 7 * w;
                Panel p = fit_panel(a, b, f);
                double err = fit_error(p, f);
                if (err > kTol && (b - a) > kMinWidth) {
                    double mid = 0.5 * (a + b);
                    next.emplace_back(a, mid);
                    next.emplace_back(mid, b);
                } else {
                    done.push_back(p);
                }
            }
            work.swap(next);
        }
        std::sort(done.begin(), done.end(),
                  [](const Panel& u, const Panel& v) { return u.a < v.a; });
        panels_ = std::move(done);
        edges_.resize(panels_.size());
        for (std::size_t i = 0; i < panels_.size(); ++i) edges_[i] = panels_[i].a;
    }

    double eval(double x) const {
        if (x >= 1.0) return 0.0;
        if (x < kXMin) return f_func(x);  // rare; direct evaluation
        auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        std::size_t i = (it == edges_.begin()) ? 0 : std::size_t(it - edges_.begin() - 1);
        const Panel& p = panels_[i];
        double t = (x - p.a) / (p.b - p.a);
        return ((p.c[3] * t + p.c[2]) * t + p.c[1]) * t + p.c[0];
    }

    std::size_t size() const { return panels_.size(); }
    bool empty() const { return panels_.empty(); }

    std::string serialize() const {
        std::string out(kMagic, 7);
        detail::put_u64(out, panels_.size());
        for (const auto& p : panels_) {
            detail::put_f64(out, p.a);
            detail::put_f64(out, p.b);
            for (double c : p.c) detail::put_f64(out, c);
        }
        std::uint64_t sum = fnv1a64(out.data() + 7, out.size() - 7);
        detail::put_u64(out, sum);
        return out;
    }

    bool deserialize(const std::string& bytes) {
        if (bytes.size() < 7 + 8 + 8 || bytes.compare(0, 7, kMagic) != 0) return false;
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
        std::uint64_t n = detail::get_u64(p + 7);
        std::size_t need = 7 + 8 + n * 48 + 8;
        if (bytes.size() != need) return false;
        std::uint64_t stored = detail::get_u64(p + need - 8);
        if (stored != fnv1a64(bytes.data() + 7, need - 15)) return false;
        panels_.resize(n);
        std::size_t off = 15;
        for (auto& pn : panels_) {
            pn.a = detail::get_f64(p + off);
            pn.b = detail::get_f64(p + off + 8);
            for (int j = 0; j < 4; ++j) pn.c[j] = detail::get_f64(p + off + 16 + 8 * j);
            off += 48;
        }
        edges_.resize(panels_.size());
        for (std::size_t i = 0; i < panels_.size(); ++i) edges_[i] = panels_[i].a;
        return true;
    }

private:
    static constexpr double kSampleT[7] = {0.0, 1.0 / 6, 1.0 / 3, 0.5, 2.0 / 3, 5.0 / 6, 1.0};

    static Panel fit_panel(double a, double b, const double* f) {
        // least-squares cubic over the 7 samples (normal equations in t)
        double S[7] = {0};
        double R[4] = {0};
        for (int i = 0; i < 7; ++i) {
            double t = kSampleT[i], tp = 1.0;
            for (int j = 0; j < 7; ++j) {
                S[j] += tp;
                tp *= t;
            }
            tp = 1.0;
            for (int j = 0; j < 4; ++j) {
                R[j] += f[i] * tp;
                tp *= t;
            }
        }
        double M[4][5];
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) M[r][c] = S[r + c];
            M[r][4] = R[r];
        }
        for (int col = 0; col < 4; ++col) {  // Gaussian elimination, partial pivot
            int piv = col;
            for (int r = col + 1; r < 4; ++r)
                if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
            for (int c = 0; c < 5; ++c) std::swap(M[col][c], M[piv][c]);
            for (int r = 0; r < 4; ++r) {
                if (r == col) continue;
                double k = M[r][col] / M[col][col];
                for (int c = col; c < 5; ++c) M[r][c] -= k * M[col][c];
            }
        }
        Panel p{a, b, {M[0][4] / M[0][0], M[1][4] / M[1][1], M[2][4] / M[2][2], M[3][4] / M[3][3]}};
        return p;
    }

    static double fit_error(const Panel& p, const double* f) {
        double e = 0.0;
        for (int i = 0; i < 7; ++i) {
            double t = kSampleT[i];
            double v = ((p.c[3] * t + p.c[2]) * t + p.c[1]) * t + p.c[0];
            e = std::max(e, std::abs(v - f[i]));
        }
        return e;
    }

    std::vector<Panel> panels_;
    std::vector<double> edges_;
};

// Process-wide F table, built lazily (or loaded from COTMOM_CACHE_DIR).
inline const FGrid& f_grid() {
    static FGrid grid;
    static std::once_flag flag;
    std::call_once(flag, [] {
        const char* dir = std::getenv("COTMOM_CACHE_DIR");
        std::string path;
        if (dir && *dir) {
            path = std::string(dir) + "/fgrid.bin";
            std::string bytes;
            if (read_file(path, bytes) && grid.deserialize(bytes)) return;
        }
        grid.build(default_threads());
        if (!path.empty()) {
            try {
                atomic_write_file(path, grid.serialize());
            } catch (const std::exception&) {
                // cache is best-effort
            }
        }
    });
    return grid;
}

// F for the evaluation hot path: table lookup on [1/600, 1], direct below.
inline double f_fast(double x) {
    if (x < 0.0 || x > 1.0) throw domain_error("f_fast: x must lie in [0,1]");
    if (x == 0.0) return 0.5 * a1_constant();
    return f_grid().eval(x);
}

} // namespace cotmom

#endif
