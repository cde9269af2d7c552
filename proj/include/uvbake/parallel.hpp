// parallel.hpp — deterministic data-parallel helpers.
//
// Work is split into contiguous index ranges, one per worker. Every kernel in
// this library writes disjoint outputs per index, so results are identical for
// any worker count. UVBAKE_THREADS caps the worker pool (0 or unset = one
// worker per hardware thread).
#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace uvbake {

inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("UVBAKE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = static_cast<int>(std::min(cap, 256L));
    }
    return n;
}

// Runs fn(begin, end) over a partition of [0, count) across workers.
// Ranges are disjoint and contiguous; fn must not touch state outside its
// range. Falls back to a direct call for small counts or one worker.
inline void parallel_ranges(int count, const std::function<void(int, int)>& fn) {
    if (count <= 0) return;
    const int workers = std::min(worker_count(), count);
    if (workers <= 1 || count < 64) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

// Fixed-structure pairwise reduction: the summation tree depends only on the
// element count, so results do not vary with worker count or chunking.
inline double pairwise_sum(const double* v, size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

}  // namespace uvbake
