#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace shelab {

/// Runs fn(id) for id in [first, first + count) on `workers` threads pulling from a
/// shared counter. Results come back indexed by id - first, so the output does not
/// depend on scheduling. The first exception thrown by any task is rethrown.
template <class Fn>
auto run_replicates(std::uint64_t first, std::size_t count, unsigned workers, Fn fn)
    -> std::vector<decltype(fn(first))>
{
    using R = decltype(fn(first));
    std::vector<R> out(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                out[i] = fn(first + i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

/// Worker count used when the caller passes 0.
inline unsigned default_workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace shelab
