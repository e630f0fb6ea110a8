#ifndef MOLFIELD_PARALLEL_HPP
#define MOLFIELD_PARALLEL_HPP

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

// Deterministic worker-thread helper. Work items are partitioned into
// contiguous blocks by index, each worker owns its block, and results must
// be written to per-index (or per-thread, merged in thread order) storage.
// Nothing here depends on scheduling, so output is identical for any
// thread count.
namespace molfield {

// Thread-count policy: explicit request wins, then the MOLFIELD_THREADS
// environment variable, then hardware concurrency; never below 1.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MOLFIELD_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n) across static contiguous blocks.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(threads < 1 ? 1 : threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t base = n / workers, extra = n % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace molfield

#endif
