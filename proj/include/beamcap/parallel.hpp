#pragma once

#include <algorithm>
#include <cstdlib>
#include <span>
#include <thread>
#include <vector>

namespace beamcap {

// Worker cap from BEAMCAP_THREADS; 0 or unset means hardware concurrency.
inline std::size_t worker_count(std::size_t n_items) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("BEAMCAP_THREADS")) {
    cap = std::strtoull(env, nullptr, 10);
  }
  if (cap == 0) {
    cap = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  return std::max<std::size_t>(1, std::min(cap, std::max<std::size_t>(1, n_items)));
}

// Static block partition of [0, n); fn(begin, end) must write only to
// disjoint preallocated slots so results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = worker_count(n);
  if (workers <= 1 || n == 0) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin == end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

// Pairwise summation in index order: the result depends only on the values,
// not on how many workers produced them.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace beamcap
