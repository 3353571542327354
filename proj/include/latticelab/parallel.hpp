// parallel.hpp -- deterministic chunked work distribution. Chunk boundaries
// depend only on the item count, never on the worker count, and every chunk's
// output lands in its own slot, so results are bit-identical for any pool size.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace latticelab {

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// fn(chunk_index, begin, end) over [0, n) in chunks of fixed size.
template <class Fn>
void parallel_chunks(std::uint64_t n, std::uint64_t chunk_size, unsigned workers, Fn&& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::uint64_t chunks = (n + chunk_size - 1) / chunk_size;
    if (workers <= 1 || chunks == 1) {
        for (std::uint64_t c = 0; c < chunks; ++c)
            fn(static_cast<std::size_t>(c), c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) return;
            fn(static_cast<std::size_t>(c), c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace latticelab
