#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace retrial::detail {

/// Evaluates fn(0..count-1) on up to `threads` workers (0: hardware
/// concurrency). Results keep index order; the first exception is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, int threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}));
    std::vector<std::optional<Result>> slots(count);
    std::vector<std::exception_ptr> errors(count);

    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                slots[k].emplace(fn(k));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Result> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace retrial::detail
