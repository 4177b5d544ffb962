#ifndef COTMOM_SUMMATION_HPP
#define COTMOM_SUMMATION_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace cotmom {

// Neumaier-compensated accumulator.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;

    void add(double v) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

template <class F>
double kahan_sum(std::size_t n, F&& term) {
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(term(i));
    return acc.value();
}

// Fixed-shape blocked summation: leaves are compensated sums of kBlock
// consecutive terms, then blocks are combined pairwise.  The shape depends
// only on n, so the result is bit-identical no matter how the leaf range is
// partitioned across threads.
inline constexpr std::size_t kSumBlock = 1024;

template <class F>
double blocked_sum(std::size_t n, F&& term) {
    std::vector<double> blocks;
    blocks.reserve(n / kSumBlock + 1);
    for (std::size_t b = 0; b < n; b += kSumBlock) {
        std::size_t e = std::min(n, b + kSumBlock);
        KahanSum acc;
        for (std::size_t i = b; i < e; ++i) acc.add(term(i));
        blocks.push_back(acc.value());
    }
    // pairwise reduction
    while (blocks.size() > 1) {
        std::size_t half = (blocks.size() + 1) / 2;
        for (std::size_t i = 0; i + half < blocks.size(); ++i)
            blocks[i] += blocks[i + half];
        blocks.resize(half);
    }
    return blocks.empty() ? 0.0 : blocks[0];
}

} // namespace cotmom

#endif
