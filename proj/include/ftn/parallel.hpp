#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "ftn/linalg.hpp"

namespace ftn {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Callers write
/// results into slot i and reduce afterwards, so the outcome does not depend
/// on the thread count. The first exception thrown by any task is rethrown.
template <typename Fn>
void parallel_for(Index count, int threads, Fn&& fn)
{
    const int workers = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(count, 1)));
    if (workers == 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (Index i = next++; i < count; i = next++) {
            try {
                fn(i);
            }
            catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

} // namespace ftn
