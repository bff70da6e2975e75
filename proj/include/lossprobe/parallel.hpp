// parallel.hpp — index-based worker pool for independent tasks.
//
// Outputs must be keyed by index so results are identical for any worker
// count; the pool only affects scheduling.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lossprobe {

// Worker count: LOSSPROBE_THREADS when set (clamped to >= 1), otherwise the
// hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("LOSSPROBE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs fn(i) for i in [0, n) across up to `workers` threads.  The first
// exception wins and is rethrown on the caller after all threads join.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const unsigned pool = static_cast<unsigned>(
        std::min<std::size_t>(workers ? workers : 1, n));
    if (pool <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned t = 0; t < pool; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lossprobe
