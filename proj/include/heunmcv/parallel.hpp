#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace heunmcv {

/// Worker cap: HEUNMCV_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
inline int thread_cap() {
    if (const char* env = std::getenv("HEUNMCV_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

/// Runs body(i) for i in [0, n). Iterations must be independent; the first
/// exception thrown by any worker is rethrown after all workers finish.
template <class F>
void parallel_for(int n, F&& body) {
    if (n <= 0) return;
    const int workers = std::min(n, thread_cap());
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(run);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace heunmcv
