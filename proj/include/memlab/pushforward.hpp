#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "memlab/design.hpp"
#include "memlab/prior.hpp"
#include "memlab/spectral.hpp"

namespace memlab {

// N(0, S) with S = X diag(omega) X^T, held as a symmetric eigendecomposition.
// An added isotropic noise t enters as a shift on the eigenvalues, so one
// factorization serves every noise level.
class GaussianPushforward {
 public:
  GaussianPushforward(const DesignMatrix& design, const Eigen::VectorXd& omega_diag);
  explicit GaussianPushforward(const Eigen::MatrixXd& covariance);

  int n() const { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }  // descending
  const Eigen::MatrixXd& basis() const { return basis_; }
  double reconstruction_error() const { return reconstruction_error_; }

  SpectralMeasure spectrum() const;

  Eigen::VectorXd solve_shifted(const Eigen::VectorXd& y, double t) const;  // (S + tI)^{-1} y
  Eigen::VectorXd apply(const Eigen::VectorXd& y, double t = 0.0) const;    // (S + tI) y

  // Throws SingularCovarianceError when cond(S + tI) > 1e14.
  double log_density(const Eigen::VectorXd& y, double t = 0.0) const;
  Eigen::VectorXd score(const Eigen::VectorXd& y, double t = 0.0) const;

  double fisher_trace(double t) const;             // (1/n) sum 1/(lambda_i + t)
  double fisher_trace_derivative(double t) const;  // -(1/n) sum 1/(lambda_i + t)^2
  double mean_eigenvalue() const;                  // (1/n) sum lambda_i
  bool singular(double rel_floor = 1e-14) const;

 private:
  void factorize(const Eigen::MatrixXd& covariance);
  void check_conditioning(double t) const;

  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigenvalues_;
  double reconstruction_error_ = 0.0;
};

// Exact finite mixture of Gaussian pushforwards for the sparse prior:
//   p_t(y) = (1/M) sum_S phi(y; 0, B_t + c X_S X_S^T),
// with B_t = (eta/d) X X^T + t I and c = (1-eta)/K. Components are handled
// through rank-K updates of the shared base factorization; a per-component
// K x K capacitance factor is cached per noise level.
class MixturePushforward {
 public:
  static constexpr std::int64_t kMaxComponents = 1'000'000;

  MixturePushforward(const DesignMatrix& design, const PriorSpec& prior);

  std::int64_t components() const { return static_cast<std::int64_t>(supports_.size()); }
  const std::vector<std::vector<int>>& supports() const { return supports_; }
  int n() const { return n_; }

  // Everything that depends on the added noise level t but not on y.
  struct NoiseContext {
    double t = 0.0;
    double spike_scale = 0.0;                   // c
    Eigen::VectorXd base_eigenvalues;           // of B_t, descending
    Eigen::MatrixXd base_inverse_design;        // B_t^{-1} X
    Eigen::MatrixXd gram;                       // X^T B_t^{-1} X
    double base_log_det = 0.0;
    std::vector<Eigen::MatrixXd> capacitance_inverse;  // per component, K x K
    std::vector<double> capacitance_log_det;
  };

  std::shared_ptr<const NoiseContext> context(double t) const;

  struct Evaluation {
    double log_density = 0.0;
    Eigen::VectorXd score;
    Eigen::VectorXd responsibilities;
  };

  Evaluation evaluate(const Eigen::VectorXd& y, const NoiseContext& ctx) const;
  Evaluation evaluate(const Eigen::VectorXd& y, double t = 0.0) const;

  Eigen::MatrixXd log_density_hessian(const Eigen::VectorXd& y, const NoiseContext& ctx) const;

  // Responsibility-weighted combination of per-component posterior means
  // under observation noise sigma2.
  Eigen::VectorXd posterior_mean_theta(const Eigen::VectorXd& y, double sigma2,
                                       const NoiseContext& ctx) const;

  // Mixture-averaged covariance pushforward (X Omega-bar X^T = X X^T / d).
  const GaussianPushforward& averaged() const { return *averaged_; }

 private:
  DesignMatrix design_;  // owned copy; the factorization is shared state
  PriorSpec prior_;
  int n_ = 0;
  double eta_over_d_ = 0.0;
  double spike_scale_ = 0.0;
  std::vector<std::vector<int>> supports_;
  std::unique_ptr<GaussianPushforward> averaged_;  // X X^T / d
  mutable std::mutex context_mutex_;
  mutable std::map<double, std::shared_ptr<const NoiseContext>> context_cache_;
};

// Log-density and score of the pushforward of X theta for any supported
// prior family, at zero added noise.
std::pair<double, Eigen::VectorXd> pushforward_logdensity_and_score(const DesignMatrix& design,
                                                                    const PriorSpec& prior,
                                                                    const Eigen::VectorXd& y);

}  // namespace memlab
