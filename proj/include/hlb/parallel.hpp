#pragma once
#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace hlb {

inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{0};
    return n;
}

// 0 means "use hardware concurrency".
inline void set_threads(int n) { thread_setting() = std::max(0, n); }

inline int thread_count() {
    int n = thread_setting();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition of [0, n). Each index is written by exactly one
// thread, so results do not depend on the thread count.
template <class Fn>
void parallel_for(int n, Fn&& fn, int min_per_thread = 16) {
    int nt = std::min(thread_count(), std::max(1, n / std::max(1, min_per_thread)));
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        int lo = static_cast<int>(static_cast<long long>(n) * t / nt);
        int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / nt);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace hlb
