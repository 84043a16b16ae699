#pragma once

// Test-only reference implementations. Everything here recomputes library
// quantities through an independent route: dense per-component linear
// algebra, literal quadrature of defining integrals, or finite differences.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "memlab/design.hpp"
#include "memlab/prior.hpp"

namespace memlab::oracle {

// Fisher information of the scalar two-point mixture by Romberg quadrature
// of the defining integral of (p')^2 / p over the real line.
double scalar_fisher_romberg(double eta, double center, double t, double rel_tol = 1e-10);

// Dense sparse-mixture machinery: every component covariance is assembled
// explicitly and handled with plain LU solves.
struct DenseMixture {
  std::vector<Eigen::MatrixXd> covariances;  // X Omega_S X^T
  std::vector<std::vector<int>> supports;
  Eigen::MatrixXd design;
  PriorSpec prior;
};
DenseMixture dense_mixture(const DesignMatrix& X, const PriorSpec& prior);

double dense_mixture_density(const DenseMixture& mix, const Eigen::VectorXd& y, double t);
Eigen::VectorXd dense_mixture_score(const DenseMixture& mix, const Eigen::VectorXd& y, double t);
Eigen::MatrixXd dense_mixture_hessian(const DenseMixture& mix, const Eigen::VectorXd& y,
                                      double t);
Eigen::VectorXd dense_mixture_posterior_mean(const DenseMixture& mix, const Eigen::VectorXd& y,
                                             double sigma2);

// Posterior mean by literal tensor-grid quadrature over theta (small d only).
Eigen::VectorXd grid_posterior_mean(const DesignMatrix& X, const PriorSpec& prior,
                                    const Eigen::VectorXd& y, double sigma2, int points_per_axis,
                                    double half_width);

// Central finite difference of a log-density.
Eigen::VectorXd finite_difference_score(const std::function<double(const Eigen::VectorXd&)>& logp,
                                        const Eigen::VectorXd& y, double step);

// (1/n) int ||grad log p||^2 p over a uniform 2-D grid (n = 2 designs only).
double fisher_grid_2d(const DenseMixture& mix, double half_width, int points_per_axis);

// Moments of the Marchenko-Pastur density by direct quadrature of the
// density formula on [lambda_minus, lambda_plus].
double mp_moment_quadrature(double gamma, const std::function<double(double)>& f);

}  // namespace memlab::oracle
