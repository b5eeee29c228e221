#pragma once

#include <thread>
#include <vector>

namespace srp {

inline int resolve_threads(int n_threads) {
    if (n_threads > 0) return n_threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Run fn(begin, end) over contiguous chunks of [0, n). The chunk boundaries
// depend only on (n, n_threads), and chunks write disjoint output slots, so
// results cannot depend on scheduling.
template <typename Fn>
void parallel_for(size_t n, int n_threads, Fn&& fn) {
    int workers = resolve_threads(n_threads);
    if (workers <= 1 || n < 2) {
        if (n > 0) fn(size_t{0}, n, 0);
        return;
    }
    size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        size_t begin = static_cast<size_t>(t) * chunk;
        if (begin >= n) break;
        size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end, t] { fn(begin, end, t); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace srp
