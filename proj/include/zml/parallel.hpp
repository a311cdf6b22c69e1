#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace zml {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{0};
    return n;
}
}  // namespace detail

/// Worker count used by every parallel loop. 0 means hardware concurrency.
inline void set_thread_count(unsigned n) { detail::thread_setting() = n; }

inline unsigned thread_count() {
    unsigned n = detail::thread_setting();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
/// write results into per-index slots so output never depends on scheduling.
/// The first exception thrown by any worker is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise summation; result depends only on the order of `values`.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace zml
