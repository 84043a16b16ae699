#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>

#include "memlab/design.hpp"
#include "memlab/prior.hpp"
#include "memlab/pushforward.hpp"
#include "memlab/spectral.hpp"

namespace memlab {

// A design, a prior, and a noise level, with a fixed test covariance Sigma
// (identity unless given). All metrics are computed against this object.
// Immutable after construction and safe to share across threads.
class ModelInstance {
 public:
  ModelInstance(DesignMatrix design, PriorSpec prior, double sigma2);
  ModelInstance(DesignMatrix design, PriorSpec prior, double sigma2, Eigen::MatrixXd sigma);

  const DesignMatrix& design() const { return design_; }
  const PriorSpec& prior() const { return prior_; }
  double sigma2() const { return sigma2_; }
  int n() const { return design_.rows(); }
  int d() const { return design_.cols(); }

  bool identity_sigma() const { return !sigma_.has_value(); }
  const Eigen::MatrixXd& sigma_matrix() const;
  double sigma_norm2(const Eigen::VectorXd& v) const;  // v' Sigma v
  double sigma_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  double lambda_sigma() const { return lambda_sigma_; }  // ||X Sigma^{-1/2}||^2 / n

  bool mixture() const { return mixture_ != nullptr; }
  const GaussianPushforward& gaussian() const;
  const MixturePushforward& sparse_mixture() const;

  // Spectral measure of X Omega X^T (mixture-averaged Omega for the sparse prior).
  const SpectralMeasure& spectrum() const { return spectrum_; }

  // Pushforward eigenvalues used by the exact formulas (same object as above).
  const Eigen::VectorXd& pushforward_eigenvalues() const;

  std::string describe() const;

 private:
  void build();

  DesignMatrix design_;
  PriorSpec prior_;
  double sigma2_;
  std::optional<Eigen::MatrixXd> sigma_;
  double lambda_sigma_ = 0.0;
  std::shared_ptr<GaussianPushforward> gaussian_;
  std::shared_ptr<MixturePushforward> mixture_;
  SpectralMeasure spectrum_;
};

}  // namespace memlab
