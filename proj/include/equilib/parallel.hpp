#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace equilib {

/// Worker count from EQUILIB_THREADS (default 1, never above hardware
/// concurrency).
unsigned thread_count();

/// Sums body(chunk) over a fixed number of chunks. The chunking does not
/// depend on the thread count and partials are added in chunk order, so the
/// result is bit-identical for any EQUILIB_THREADS value.
double chunked_sum(std::size_t chunks, const std::function<double(std::size_t)>& body);

/// Runs body(chunk) for every chunk, possibly concurrently.
void chunked_for(std::size_t chunks, const std::function<void(std::size_t)>& body);

}  // namespace equilib
