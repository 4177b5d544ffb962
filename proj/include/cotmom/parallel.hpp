#ifndef COTMOM_PARALLEL_HPP
#define COTMOM_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace cotmom {

inline unsigned default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

// Parallel loop over [0, n).  Work items are claimed from a shared counter in
// chunks; each item writes only to its own output slot, so results are
// independent of the thread count.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body, std::size_t chunk = 16) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(chunk);
            if (b >= n) break;
            std::size_t e = std::min(n, b + chunk);
            for (std::size_t i = b; i < e; ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    pool.reserve(nt);
    for (unsigned t = 0; t + 1 < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace cotmom

#endif
