#ifndef COTMOM_PRIMES_HPP
#define COTMOM_PRIMES_HPP

#include <cstdint>
#include <vector>

namespace cotmom {

inline std::vector<bool> prime_table(std::uint64_t n) {
    std::vector<bool> is(n + 1, true);
    if (n >= 0) is[0] = false;
    if (n >= 1) is[1] = false;
    for (std::uint64_t p = 2; p * p <= n; ++p)
        if (is[p])
            for (std::uint64_t m = p * p; m <= n; m += p) is[m] = false;
    return is;
}

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> out;
    if (hi < 2 || hi < lo) return out;
    auto tab = prime_table(hi);
    for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n)
        if (tab[n]) out.push_back(n);
    return out;
}

} // namespace cotmom

#endif
