#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace fermisig {

// parallel loop over [0, n); work items must be independent
template <typename F>
void parallel_for(int n, F&& body) {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::min(hw, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace fermisig
