#ifndef COTMOM_COTSUM_HPP
#define COTMOM_COTSUM_HPP

// Cotangent sums c0(r/b) = sum_{m<b} (m/b) cot(pi m r/b), the two Vasyunin
// variants, and high-throughput tables over a full residue class.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cache.hpp"
#include "common.hpp"
#include "parallel.hpp"
#include "primes.hpp"
#include "summation.hpp"

namespace cotmom {

inline void check_coprime_pair(std::uint64_t r, std::uint64_t b, const char* who) {
    if (b < 2) throw domain_error(std::string(who) + ": b must be >= 2");
    if (r < 1 || r >= b) throw domain_error(std::string(who) + ": need 1 <= r < b");
    if (std::gcd(r, b) != 1) throw domain_error(std::string(who) + ": r and b must be coprime");
}

inline std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t q) {
    check_coprime_pair(a % q == 0 ? q : a % q, q, "mod_inverse");
    long long t = 0, nt = 1;
    long long rr = static_cast<long long>(q), nr = static_cast<long long>(a % q);
    while (nr != 0) {
        long long qq = rr / nr;
        std::swap(t -= qq * nt, nt);
        std::swap(rr -= qq * nr, nr);
    }
    if (t < 0) t += static_cast<long long>(q);
    return static_cast<std::uint64_t>(t);
}

namespace detail {

// cot(pi j / b) for j = 1..b-1 with exact odd symmetry: the upper half is
// the mirrored negation of the lower half, and the midpoint (even b) is 0.
inline std::vector<double> cot_table(std::uint64_t b) {
    std::vector<double> tab(b, 0.0);  // tab[j], j = 1..b-1 used
    for (std::uint64_t j = 1; 2 * j < b; ++j) {
        double v = 1.0 / std::tan(kPi * double(j) / double(b));
        tab[j] = v;
        tab[b - j] = -v;
    }
    if (b % 2 == 0) tab[b / 2] = 0.0;
    return tab;
}

} // namespace detail

// c0(r/b) by compensated summation of the defining series.  The cotangent
// argument is reduced as (m*r mod b)/b before evaluation, which keeps the
// phase exact for any b.
inline double c0(std::uint64_t r, std::uint64_t b) {
    check_coprime_pair(r, b, "c0");
    auto tab = detail::cot_table(b);
    std::uint64_t idx = 0;
    return blocked_sum(b - 1, [&](std::size_t i) {
        std::uint64_t m = i + 1;
        idx += r;
        if (idx >= b) idx -= b;
        return double(m) * tab[idx];
    }) / double(b);
}

enum class VasyuninVariant { standard, paper };

// standard: sum {mr/b} cot(pi m/b); paper: sum {mr/b} cot(pi m r/b).
inline double vasyunin(std::uint64_t r, std::uint64_t b, VasyuninVariant variant) {
    check_coprime_pair(r, b, "vasyunin");
    auto tab = detail::cot_table(b);
    std::uint64_t idx = 0;
    return blocked_sum(b - 1, [&](std::size_t i) {
        std::uint64_t m = i + 1;
        idx += r;
        if (idx >= b) idx -= b;
        double frac = double(idx) / double(b);
        double ct = (variant == VasyuninVariant::standard) ? tab[m] : tab[idx];
        return frac * ct;
    });
}

// summation-quality canary: sum_{m<b} cot(pi m/b) = 0
inline double cot_zero_sum(std::uint64_t b) {
    auto tab = detail::cot_table(b);
    return blocked_sum(b - 1, [&](std::size_t i) { return tab[i + 1]; });
}

// ------------------------------------------------------------------
// full tables
// ------------------------------------------------------------------

struct C0Table {
    std::uint64_t q = 0;
    std::vector<double> values;  // index a-1, a = 1..q-1
    std::uint64_t checksum = 0;  // FNV-1a of the value bytes
    std::string meta;            // key=value lines

    double at(std::uint64_t a) const { return values.at(a - 1); }
};

inline std::uint64_t table_checksum(const std::vector<double>& values) {
    std::string bytes;
    bytes.reserve(values.size() * 8);
    for (double v : values) detail::put_f64(bytes, v);
    return fnv1a64(bytes.data(), bytes.size());
}

// All of c0(a/q), a = 1..q-1, for prime q.  Only the lower half is computed;
// the upper half is the exact negation (oddness under a -> q-a).  The inner
// sum uses the fixed blocked reduction, so the table is bit-identical for
// any thread count.
inline C0Table c0_table(std::uint64_t q, unsigned threads = 0,
                        std::uint64_t max_q = 2'000'000) {
    if (!is_prime(q) || q < 3) throw domain_error("c0_table: q must be an odd prime");
    if (q > max_q) throw domain_error("c0_table: q exceeds the configured table limit");
    if (threads == 0) threads = default_threads();

    C0Table t;
    t.q = q;
    t.values.assign(q - 1, 0.0);
    auto tab = detail::cot_table(q);
    const std::uint64_t half = (q - 1) / 2;

    parallel_for(half, threads, [&](std::size_t i) {
        std::uint64_t a = i + 1;
        std::uint64_t idx = 0;
        double v = blocked_sum(q - 1, [&](std::size_t j) {
            std::uint64_t m = j + 1;
            idx += a;
            if (idx >= q) idx -= q;
            return double(m) * tab[idx];
        }) / double(q);
        t.values[a - 1] = v;
        t.values[q - a - 1] = -v;
    });

    t.checksum = table_checksum(t.values);
    t.meta = "builder=c0_table\nprecision=double\nhalf_table=1\nthreads_hint=" +
             std::to_string(threads) + "\n";
    return t;
}

// ------------------------------------------------------------------
// binary cache: "C0TAB" + version 0x01 + q (u64 LE) + (q-1) f64 LE values
// + u64 FNV-1a of the value bytes
// ------------------------------------------------------------------

inline constexpr char kC0TabMagic[5] = {'C', '0', 'T', 'A', 'B'};

inline std::string c0_table_serialize(const C0Table& t) {
    std::string out(kC0TabMagic, 5);
    out.push_back(0x01);
    detail::put_u64(out, t.q);
    std::string payload;
    payload.reserve(t.values.size() * 8);
    for (double v : t.values) detail::put_f64(payload, v);
    out += payload;
    detail::put_u64(out, fnv1a64(payload.data(), payload.size()));
    return out;
}

inline C0Table c0_table_deserialize(const std::string& bytes) {
    if (bytes.size() < 5 + 1 + 8 + 8 || bytes.compare(0, 5, kC0TabMagic, 5) != 0)
        throw data_error("c0 table cache: bad magic");
    if (bytes[5] != 0x01) throw data_error("c0 table cache: unsupported version");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::uint64_t q = detail::get_u64(p + 6);
    std::size_t need = 5 + 1 + 8 + (q - 1) * 8 + 8;
    if (q < 3 || bytes.size() != need) throw data_error("c0 table cache: truncated file");
    std::uint64_t stored = detail::get_u64(p + need - 8);
    std::uint64_t actual = fnv1a64(bytes.data() + 14, (q - 1) * 8);
    if (stored != actual) throw data_error("c0 table cache: checksum mismatch");
    C0Table t;
    t.q = q;
    t.checksum = stored;
    t.values.resize(q - 1);
    for (std::uint64_t a = 0; a < q - 1; ++a) t.values[a] = detail::get_f64(p + 14 + 8 * a);
    return t;
}

inline void c0_table_save(const C0Table& t, const std::string& path) {
    atomic_write_file(path, c0_table_serialize(t));
    atomic_write_file(path + ".meta", t.meta);
}

inline C0Table c0_table_load(const std::string& path) {
    std::string bytes;
    if (!read_file(path, bytes)) throw data_error("c0 table cache: cannot read " + path);
    return c0_table_deserialize(bytes);
}

// Cached build: loads from <dir>/c0table_<q>.bin when present, else builds
// and publishes (atomic rename).
inline C0Table c0_table_cached(std::uint64_t q, unsigned threads, const std::string& cache_dir) {
    if (cache_dir.empty()) return c0_table(q, threads);
    std::string path = cache_dir + "/c0table_" + std::to_string(q) + ".bin";
    std::string bytes;
    if (read_file(path, bytes)) {
        C0Table t = c0_table_deserialize(bytes);
        if (t.q == q) return t;
        throw data_error("c0 table cache: wrong q in " + path);
    }
    C0Table t = c0_table(q, threads);
    try {
        c0_table_save(t, path);
    } catch (const std::exception&) {
        // cache is best-effort
    }
    return t;
}

} // namespace cotmom

#endif
