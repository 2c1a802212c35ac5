#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sulab {

// Worker count from SULAB_THREADS (default 1). Only loops with disjoint
// writes use this; every reduction in the library stays serial so results
// are identical for any thread count.
inline int thread_count() {
  static int n = [] {
    const char* env = std::getenv("SULAB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v > 0 ? v : 1;
  }();
  return n;
}

template <class F>
void parallel_for(int begin, int end, F body) {
  const int nt = thread_count();
  const int span = end - begin;
  if (nt <= 1 || span < 2 * nt) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const int chunk = (span + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sulab
