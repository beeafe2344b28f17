#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace adisweep {

// Thread count resolution order: explicit argument, ADISWEEP_THREADS, then
// hardware concurrency. Results are always collected by task index, so the
// aggregate is byte-identical for any thread count.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("ADISWEEP_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

template <class F>
auto parallel_map(std::size_t n, F&& f, unsigned n_threads = 0)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    if (n_threads == 0) n_threads = default_thread_count();
    std::vector<R> results(n);
    if (n == 0) return results;

    if (n_threads == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = f(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                results[i] = f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    unsigned count = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
    threads.reserve(count);
    for (unsigned i = 0; i < count; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace adisweep
