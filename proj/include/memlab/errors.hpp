#pragma once

#include <stdexcept>
#include <string>

namespace memlab {

// Design matrix failed the full-row-rank check after one resample.
struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse mixture would need more than the enumerable component budget.
struct TooManyComponentsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularCovarianceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularPushforwardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedPriorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two fixed-point starts converged to different Stieltjes values.
struct BranchAmbiguityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoEdgeFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace memlab
