#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace memlab {

struct MonteCarloEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(replicates)
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
};

// Thread cap from MEMLAB_THREADS; falls back to hardware concurrency.
int thread_cap();

// Evaluates replicate(i) for i in [0, reps). Each replicate must derive all
// of its randomness from (seed, i), so the schedule cannot change results;
// the reduction runs in replicate-index order.
MonteCarloEstimate run_replicates(std::int64_t reps, std::uint64_t seed,
                                  const std::function<double(std::int64_t)>& replicate);

// Same contract for replicates producing several statistics at once.
std::vector<MonteCarloEstimate> run_replicates_multi(
    std::int64_t reps, std::uint64_t seed, int stats,
    const std::function<void(std::int64_t, double*)>& replicate);

}  // namespace memlab
