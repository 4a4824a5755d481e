#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace cpree {

// How replicate loops run. serial = true selects the reference loop.
struct Exec {
    int workers = 1;
    bool serial = false;

    static Exec reference() { return {1, true}; }
};

// out[i] = f(i) for i < n. Each replicate derives its own substream, so the
// result does not depend on the schedule or the worker count.
template <class T, class F>
std::vector<T> replicate_map_serial(std::uint64_t n, F&& f) {
    std::vector<T> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
}

template <class T, class F>
std::vector<T> replicate_map_parallel(std::uint64_t n, int workers, F&& f) {
    static_assert(!std::is_same_v<T, bool>, "vector<bool> writes race; use std::uint8_t");
    std::vector<T> out(n);
    std::exception_ptr failure;
    std::mutex guard;
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers < 1 ? 1 : workers)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::uint64_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

template <class T, class F>
std::vector<T> replicate_map(std::uint64_t n, const Exec& exec, F&& f) {
    if (exec.serial) return replicate_map_serial<T>(n, f);
    return replicate_map_parallel<T>(n, exec.workers, f);
}

}  // namespace cpree
