#pragma once

// Deterministic fork-join helper: the callable receives disjoint [begin, end)
// chunks covering [0, n) and must write only to caller-owned per-index slots,
// so results are independent of thread count and scheduling. Callables must
// not throw (exceptions would escape a worker thread).

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace taulab {

inline unsigned& parallel_threads_ref() {
    static unsigned n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}
inline unsigned parallel_threads() { return std::max(1u, parallel_threads_ref()); }
inline void set_parallel_threads(unsigned n) { parallel_threads_ref() = std::max(1u, n); }

// grain 0 = ceil(n / threads), one contiguous chunk per worker.
inline void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn,
                         size_t grain = 0) {
    if (n == 0) return;
    unsigned workers = parallel_threads();
    if (grain == 0) grain = (n + workers - 1) / workers;
    grain = std::max<size_t>(grain, 1);
    size_t chunks = (n + grain - 1) / grain;
    if (workers <= 1 || chunks <= 1) {
        fn(0, n);
        return;
    }
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (;;) {
            size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            size_t b = c * grain;
            fn(b, std::min(n, b + grain));
        }
    };
    size_t nt = std::min<size_t>(workers, chunks);
    std::vector<std::thread> threads;
    threads.reserve(nt - 1);
    for (size_t i = 0; i + 1 < nt; i++) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
}

}  // namespace taulab
