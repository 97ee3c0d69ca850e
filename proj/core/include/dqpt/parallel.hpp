#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace dqpt {

/// Evaluates f(0), ..., f(count - 1) on up to `workers` threads and returns the
/// results in index order. Tasks are claimed through a shared counter, so the
/// output never depends on scheduling. If any task throws, the exception of
/// the lowest failing index is rethrown after all threads have joined.
template <class F>
auto parallel_map(std::size_t count, unsigned workers, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>>
{
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> first_failure{count};

    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) {
                return;
            }
            // Tasks above a known failure are skipped; those below it still run
            // so the reported error does not depend on scheduling.
            if (i > first_failure.load(std::memory_order_relaxed)) {
                continue;
            }
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
                std::size_t seen = first_failure.load(std::memory_order_relaxed);
                while (i < seen && !first_failure.compare_exchange_weak(seen, i, std::memory_order_relaxed)) {
                }
            }
        }
    };

    const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
    if (n_threads <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned w = 0; w < n_threads; ++w) {
            pool.emplace_back(run);
        }
    }

    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace dqpt
