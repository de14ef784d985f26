#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gridbatch::batch {

/// fn(i) for i in [0, count) on up to `workers` threads. Indices are handed
/// out one at a time from a shared counter, so the split depends on timing
/// but each fn(i) runs exactly once. The first exception is rethrown after
/// all workers have stopped.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    const auto n_workers = static_cast<std::size_t>(std::max(1, workers));
    if (n_workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(std::min(n_workers, count));
        for (std::size_t w = 0; w < std::min(n_workers, count); ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= count) {
                        return;
                    }
                    try {
                        fn(i);
                    } catch (...) {
                        const std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                        next.store(count, std::memory_order_relaxed);
                        return;
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace gridbatch::batch
