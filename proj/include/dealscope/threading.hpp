#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dealscope {

// Splits [0, n) into at most `threads` contiguous chunks and runs
// fn(begin, end, chunk_index) on each. Chunk boundaries depend only on
// n and the chunk count, and per-chunk results are combined in chunk
// order by the caller, so results do not depend on scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t chunk_count = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
    if (chunk_count <= 1 || n == 0) {
        fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(chunk_count);
    const std::size_t base = n / chunk_count;
    const std::size_t extra = n % chunk_count;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunk_count; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&fn, begin, end, c] { fn(begin, end, c); });
        begin = end;
    }
    for (auto& t : pool) t.join();
}

}  // namespace dealscope
