#ifndef CEVSIM_PARALLEL_HPP
#define CEVSIM_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cevsim {

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw != 0 ? hw : 1;
}

// Deterministic parallel reduction: [0, n_items) is split into fixed-size
// chunks, workers fill one fresh accumulator per chunk, and the chunk results
// are combined in chunk-index order. The combined value is therefore a pure
// function of the inputs, independent of the thread count and schedule.
template <typename Acc, typename Worker, typename Combine>
Acc chunked_reduce(std::uint64_t n_items, std::uint64_t chunk_size, unsigned threads,
                   Worker&& worker, Combine&& combine) {
    if (n_items == 0) return Acc{};
    if (chunk_size == 0) chunk_size = 1;
    const std::uint64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    std::vector<Acc> results(n_chunks);

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) break;
            const std::uint64_t begin = c * chunk_size;
            const std::uint64_t end = std::min(n_items, begin + chunk_size);
            try {
                Acc acc{};
                worker(acc, begin, end);
                results[c] = std::move(acc);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n_chunks, std::memory_order_relaxed);
                break;
            }
        }
    };

    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), n_chunks));
    if (n_threads <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    Acc total{};
    for (std::uint64_t c = 0; c < n_chunks; ++c) combine(total, results[c]);
    return total;
}

} // namespace cevsim

#endif // CEVSIM_PARALLEL_HPP
