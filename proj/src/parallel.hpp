#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace perfcharter::detail {

// Runs body(worker, begin, end) over contiguous blocks of [0, count). Block
// boundaries depend only on count and the worker count.
template <class Body>
void parallel_blocks(std::size_t count, unsigned threads, Body &&body) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        body(std::size_t{0}, std::size_t{0}, count);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
    }
}

} // namespace perfcharter::detail
