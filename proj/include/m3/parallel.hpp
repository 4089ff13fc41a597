#pragma once

// Deterministic task-parallel helper: tasks run on any thread, each writes
// only its own slot, the caller combines slots in ascending index order.
// Results are therefore bitwise independent of the thread count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace m3 {

template <typename Fn>
void parallel_tasks(std::uint64_t task_count, unsigned threads, Fn&& fn) {
    if (task_count == 0) return;
    if (threads < 1) threads = 1;
    const unsigned workers = static_cast<unsigned>(
        threads < task_count ? threads : task_count);

    if (workers == 1) {
        for (std::uint64_t i = 0; i < task_count; ++i) fn(i);
        return;
    }

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= task_count) break;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace m3
