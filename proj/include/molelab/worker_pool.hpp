#pragma once
// Bounded fan-out for independent evaluations. Tasks are identified by index
// and write into caller-owned storage, so results are identical for any
// worker count or schedule; exceptions are captured per task and handed back
// to the caller, which owns the failure policy.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace molelab {

inline unsigned hardware_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

inline std::vector<std::exception_ptr>
parallel_for_indexed(std::size_t n, unsigned workers,
                     const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    if (n == 0) return errors;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        return errors;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto k = static_cast<unsigned>(
        std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
    return errors;
}

} // namespace molelab
