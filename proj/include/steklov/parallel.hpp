#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steklov {

/// Process-wide worker cap (0 = hardware concurrency).
inline std::atomic<unsigned>& max_threads() {
    static std::atomic<unsigned> cap{0};
    return cap;
}

inline unsigned worker_count(std::size_t jobs) {
    unsigned n = max_threads().load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

inline bool& inside_worker() {
    thread_local bool flag = false;
    return flag;
}

/// Runs fn(i) for i in [0, n) on a small pool (serially when called from a worker). Results must be written to
/// per-index slots, which keeps the outcome independent of scheduling. The
/// first exception thrown by any job is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1 || n <= 1 || inside_worker()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        inside_worker() = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace steklov
