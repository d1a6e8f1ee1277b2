#include "equilib/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace equilib {

unsigned thread_count() {
  unsigned requested = 1;
  if (const char* env = std::getenv("EQUILIB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) requested = static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return std::min(requested, hw);
}

void chunked_for(std::size_t chunks, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(thread_count(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) body(c);
    });
  }
  for (auto& t : pool) t.join();
}

double chunked_sum(std::size_t chunks, const std::function<double(std::size_t)>& body) {
  std::vector<double> partial(chunks, 0.0);
  chunked_for(chunks, [&](std::size_t c) { partial[c] = body(c); });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace equilib
