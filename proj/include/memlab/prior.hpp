#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace memlab {

enum class PriorKind { IsotropicGaussian, LowRankGaussian, SparseMixture, ScalarTwoPointMixture };

std::string to_string(PriorKind kind);
PriorKind prior_kind_from_string(const std::string& name);

// Description of the coefficient prior. Every family is scaled so that the
// covariance has unit trace, except the scalar two-point mixture whose second
// moment is 1 + eta.
struct PriorSpec {
  PriorKind kind = PriorKind::IsotropicGaussian;
  int d = 0;          // ambient dimension
  int r = 0;          // rank (LowRankGaussian)
  double eta = 1.0;   // perturbation mass, or component variance for the scalar mixture
  int K = 0;          // sparsity (SparseMixture)

  static PriorSpec isotropic(int d);
  // eta = 0 selects the exact low-rank prior (no density when r < n).
  static PriorSpec low_rank(int d, int r, double eta);
  static PriorSpec sparse_mixture(int d, int K, double eta);
  static PriorSpec scalar_two_point(double eta);

  void validate() const;

  bool single_gaussian() const {
    return kind == PriorKind::IsotropicGaussian || kind == PriorKind::LowRankGaussian;
  }
  bool exact_low_rank() const { return kind == PriorKind::LowRankGaussian && eta == 0.0; }

  // Diagonal of the covariance Omega. For SparseMixture this is the diagonal
  // of the mixture-averaged covariance, which equals I_d / d.
  Eigen::VectorXd covariance_diagonal() const;

  // Diagonal of Omega_S for a sparse-mixture component with support S.
  Eigen::VectorXd component_covariance_diagonal(const std::vector<int>& support) const;

  std::int64_t mixture_components() const;  // binom(d, K) for SparseMixture, else 1

  std::map<std::string, std::string> to_config() const;
  static PriorSpec from_config(const std::map<std::string, std::string>& section);

  std::string describe() const;
};

Eigen::VectorXd sample_theta(const PriorSpec& prior, std::uint64_t seed);
Eigen::VectorXd sample_theta(const PriorSpec& prior, std::mt19937_64& rng);

}  // namespace memlab
