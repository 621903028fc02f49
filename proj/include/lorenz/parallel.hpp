#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace lorenz {

/// Environment variable consulted when a worker count of 0 is requested.
inline constexpr const char* kWorkersEnv = "LORENZ_WORKERS";

inline int resolve_workers(int requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv(kWorkersEnv)) {
        try {
            const int value = std::stoi(env);
            if (value > 0) {
                return value;
            }
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, count) into contiguous chunks, one per worker, and calls
/// fn(begin, end) for each. Results must be written by index so that the
/// outcome does not depend on the number of workers. The exception of the
/// lowest-indexed failing chunk is rethrown.
template <typename Fn>
void parallel_for(std::int64_t count, int workers, Fn&& fn)
{
    if (count <= 0) {
        return;
    }
    const std::int64_t chunks = std::clamp<std::int64_t>(resolve_workers(workers), 1, count);
    if (chunks == 1) {
        fn(std::int64_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(chunks));
        for (std::int64_t c = 0; c < chunks; ++c) {
            const std::int64_t begin = count * c / chunks;
            const std::int64_t end = count * (c + 1) / chunks;
            pool.emplace_back([&, c, begin, end] {
                try {
                    fn(begin, end);
                } catch (...) {
                    errors[static_cast<std::size_t>(c)] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace lorenz
