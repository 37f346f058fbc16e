#pragma once

#include <cstdlib>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

namespace evofrac {

/// Worker count used by data-parallel loops. Capped by EVOFRAC_THREADS when set.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("EVOFRAC_THREADS")) {
        long requested = std::strtol(env, nullptr, 10);
        if (requested >= 1 && static_cast<unsigned long>(requested) < hw) {
            return static_cast<unsigned>(requested);
        }
        if (requested >= 1) return static_cast<unsigned>(requested);
    }
    return hw;
}

/// Runs body(i) for i in [0, n). Each index is visited exactly once; workers own
/// disjoint contiguous chunks, so writes to preallocated per-index slots stay
/// deterministic regardless of the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t used = std::min<std::size_t>(workers, n);
    const std::size_t chunk = (n + used - 1) / used;
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (std::size_t w = 0; w < used; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace evofrac
