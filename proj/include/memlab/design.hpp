#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace memlab {

enum class EntryLaw { Gaussian, Rademacher };

std::string to_string(EntryLaw law);
EntryLaw entry_law_from_string(const std::string& name);

// An n x d design with d >= n and full row rank. The symmetric
// eigendecomposition of X X^T is computed once at construction; it backs the
// rank check, the operator norm, and the sparse-mixture base covariance.
// Immutable after construction.
class DesignMatrix {
 public:
  explicit DesignMatrix(Eigen::MatrixXd entries);

  int rows() const { return static_cast<int>(entries_.rows()); }
  int cols() const { return static_cast<int>(entries_.cols()); }
  const Eigen::MatrixXd& entries() const { return entries_; }

  // Eigenpairs of X X^T, eigenvalues descending.
  const Eigen::VectorXd& gram_eigenvalues() const { return gram_eigenvalues_; }
  const Eigen::MatrixXd& gram_basis() const { return gram_basis_; }

  double operator_norm() const;   // largest singular value of X
  double smallest_singular_value() const;

  std::string to_csv() const;
  static DesignMatrix from_csv(const std::string& text);

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd gram_eigenvalues_;
  Eigen::MatrixXd gram_basis_;
};

// I.i.d. entries with mean 0 and variance 1. Resamples once with seed + 1 if
// the rank check fails, then reports RankDeficientError.
DesignMatrix make_design(int n, int d, EntryLaw law, std::uint64_t seed);

}  // namespace memlab
