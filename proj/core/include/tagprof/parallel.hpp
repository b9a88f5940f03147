#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tagprof {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Work items are
/// claimed dynamically, so body must only write to state owned by index i;
/// callers reduce the per-index results in index order afterwards, which
/// makes the outcome independent of the worker count.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    const std::size_t threads = std::min<std::size_t>(std::max(1U, workers), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(n);
                return;
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) {
        pool.emplace_back(run);
    }
    run();
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace tagprof
