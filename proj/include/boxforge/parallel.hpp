// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace boxforge {

/// Worker cap: hardware concurrency, optionally lowered by BOXFORGE_THREADS.
inline unsigned worker_cap() {
  unsigned cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("BOXFORGE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && static_cast<unsigned>(v) < cap) cap = static_cast<unsigned>(v);
  }
  return cap;
}

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; callers reduce the slots in index order afterwards, so results do
/// not depend on the number of workers.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const unsigned cap = worker_cap();
  if (n <= 1 || cap <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cap, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace boxforge
