// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace eegpipe {

// Runs fn(i) for i in [0, n) over at most `threads` workers, each owning a
// contiguous index range. Chunk boundaries depend only on (n, threads), so
// any reduction done per-chunk and combined in chunk order is deterministic
// for a fixed thread count, and threads == 1 is plain sequential execution.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = n * w / workers;
        std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// Chunk boundaries as used by parallel_for; exposed for callers that keep
// one accumulator per chunk and reduce them in order.
inline std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t n,
                                                                     int threads) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t workers =
        (threads <= 1 || n <= 1) ? 1 : std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    for (std::size_t w = 0; w < workers; ++w)
        out.emplace_back(n * w / workers, n * (w + 1) / workers);
    return out;
}

}  // namespace eegpipe
