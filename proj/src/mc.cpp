#include "memlab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace memlab {

int thread_cap() {
  if (const char* env = std::getenv("MEMLAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<MonteCarloEstimate> run_replicates_multi(
    std::int64_t reps, std::uint64_t seed, int stats,
    const std::function<void(std::int64_t, double*)>& replicate) {
  if (reps < 1) throw std::invalid_argument("run_replicates_multi: reps must be >= 1");
  if (stats < 1) throw std::invalid_argument("run_replicates_multi: stats must be >= 1");

  std::vector<double> buffer(static_cast<std::size_t>(reps) * stats);
  int threads = std::min<std::int64_t>(thread_cap(), reps);
  if (threads <= 1) {
    for (std::int64_t i = 0; i < reps; ++i) replicate(i, &buffer[i * stats]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w]() {
        for (std::int64_t i = w; i < reps; i += threads) replicate(i, &buffer[i * stats]);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Welford in index order.
  std::vector<MonteCarloEstimate> out(stats);
  for (int s = 0; s < stats; ++s) {
    double mean = 0.0, m2 = 0.0;
    for (std::int64_t i = 0; i < reps; ++i) {
      double x = buffer[i * stats + s];
      double delta = x - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (x - mean);
    }
    double var = reps > 1 ? m2 / static_cast<double>(reps - 1) : 0.0;
    out[s] = MonteCarloEstimate{mean, std::sqrt(std::max(0.0, var) / static_cast<double>(reps)),
                                reps, seed};
  }
  return out;
}

MonteCarloEstimate run_replicates(std::int64_t reps, std::uint64_t seed,
                                  const std::function<double(std::int64_t)>& replicate) {
  auto v = run_replicates_multi(reps, seed, 1,
                                [&](std::int64_t i, double* out) { out[0] = replicate(i); });
  return v[0];
}

}  // namespace memlab
