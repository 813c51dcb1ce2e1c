#ifndef SUPOU_PARALLEL_HPP
#define SUPOU_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace supou {

// Work is split into chunks whose boundaries depend only on (total, chunk_size),
// never on the thread count. Each chunk writes into its own slot, so reductions
// merged in chunk order give bit-identical results at any thread count.

inline int effective_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// fn(chunk_index, begin, end) with [begin, end) a half-open index range.
template <class Fn>
void parallel_chunks(std::int64_t total, std::int64_t chunk_size, int threads, Fn&& fn) {
    if (total <= 0) return;
    if (chunk_size <= 0) throw std::invalid_argument("parallel_chunks: chunk_size must be positive");
    const std::int64_t n_chunks = (total + chunk_size - 1) / chunk_size;
    threads = effective_threads(threads);
    if (threads == 1 || n_chunks == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            try {
                fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nw = static_cast<int>(std::min<std::int64_t>(threads, n_chunks));
    pool.reserve(static_cast<std::size_t>(nw));
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Ordered reduction helper: applies fn to each chunk, fn returns the chunk's
// partial value; partials are summed in chunk order.
template <class Fn>
double parallel_sum(std::int64_t total, std::int64_t chunk_size, int threads, Fn&& fn) {
    if (total <= 0) return 0.0;
    const std::int64_t n_chunks = (total + chunk_size - 1) / chunk_size;
    std::vector<double> partial(static_cast<std::size_t>(n_chunks), 0.0);
    parallel_chunks(total, chunk_size, threads, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
        partial[static_cast<std::size_t>(c)] = fn(b, e);
    });
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

} // namespace supou

#endif // SUPOU_PARALLEL_HPP
