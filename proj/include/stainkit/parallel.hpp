#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace stainkit {

// Number of worker threads to use. Controlled by the STAINKIT_THREADS
// environment variable; defaults to the hardware concurrency, and is always
// at least 1.
inline int thread_budget() {
    if (const char* env = std::getenv("STAINKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(begin..end) split into contiguous chunks, one per worker. The chunk
// boundaries depend only on the range and the thread count, so results that
// are written to disjoint per-index slots are identical regardless of
// scheduling order.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t count = end > begin ? end - begin : 0;
    if (count == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), count);
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        if (lo >= end) break;
        const std::size_t hi = std::min(end, lo + chunk);
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace stainkit
