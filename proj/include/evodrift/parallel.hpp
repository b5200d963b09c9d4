#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace evodrift {

// Worker-count resolution: EVODRIFT_THREADS overrides any configured value,
// then the explicit request, then the hardware count.
inline unsigned resolve_threads(unsigned requested) {
    if (const char* env = std::getenv("EVODRIFT_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(task_index) for every index in [0, count) on a pool of `threads`
// workers, pulling from an atomic counter. The first exception is rethrown
// after all workers join.
template <typename Fn>
void parallel_tasks(std::uint64_t count, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || count <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Chunked variant for tight loops over a large index range: fn(begin, end).
template <typename Fn>
void parallel_chunks(std::uint64_t total, unsigned threads, std::uint64_t chunk, Fn&& fn) {
    if (chunk < 1) chunk = 1;
    const std::uint64_t n_chunks = (total + chunk - 1) / chunk;
    parallel_tasks(n_chunks, threads, [&](std::uint64_t c) {
        const std::uint64_t begin = c * chunk;
        const std::uint64_t end = std::min(total, begin + chunk);
        fn(begin, end);
    });
}

}  // namespace evodrift
