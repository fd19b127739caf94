#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fusecat {

// Runs fn(i) for i in [0, n) on `threads` workers. Work is handed out via an
// atomic counter; the first exception is rethrown on the caller.
inline void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int64_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const int64_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = static_cast<int>(std::min<int64_t>(threads, n));
    pool.reserve(static_cast<size_t>(count));
    for (int t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (std::thread& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

// Default worker count: FUSECAT_THREADS env var, else 1.
inline int default_thread_count() {
    if (const char* env = std::getenv("FUSECAT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    return 1;
}

} // namespace fusecat
