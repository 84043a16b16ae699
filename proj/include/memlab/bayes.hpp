#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "memlab/mc.hpp"
#include "memlab/model.hpp"

namespace memlab {

using Estimator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Posterior mean E[theta | X, y]. Closed form for single-Gaussian priors;
// responsibility-weighted combination of component closed forms for the
// sparse mixture.
Eigen::VectorXd posterior_mean(const ModelInstance& model, const Eigen::VectorXd& y);

// y + sigma^2 * grad log p_{sigma^2}(y).
Eigen::VectorXd fitted_values_tweedie(const ModelInstance& model, const Eigen::VectorXd& y);

// sigma^4 * (1/n) sum_i 1/(lambda_i + sigma^2) over the pushforward spectrum.
// Zero eigenvalues contribute sigma^2 * weight, which covers the exact
// low-rank prior. UnsupportedPriorError for the sparse mixture.
double train_error_exact(const ModelInstance& model);
double train_error_exact(const Eigen::VectorXd& pushforward_eigenvalues, double sigma2);

MonteCarloEstimate train_error_mc(const ModelInstance& model, std::int64_t reps,
                                  std::uint64_t seed);

struct PredCost {
  MonteCarloEstimate pred;   // E ||theta_hat - theta||^2_Sigma
  MonteCarloEstimate cost;   // E ||theta_hat - bayes||^2_Sigma
  MonteCarloEstimate cross;  // E (theta_hat - bayes)' Sigma (bayes - theta)
};

PredCost pred_and_cost(const ModelInstance& model, const Estimator& estimator, std::int64_t reps,
                       std::uint64_t seed);

// Several estimators against one shared (theta, tau) replicate stream. Also
// reports the measured training error per estimator.
struct ComparisonRow {
  std::string name;
  MonteCarloEstimate train;
  PredCost stats;
};
std::vector<ComparisonRow> compare_estimators(const ModelInstance& model,
                                              const std::vector<std::string>& names,
                                              std::int64_t reps, std::uint64_t seed);

// Estimator zoo: "bayes", "ridge:<lambda>", "minnorm".
Estimator make_estimator(const ModelInstance& model, const std::string& name);

// One replicate of the observation model: y = X theta + sigma tau.
struct Draw {
  Eigen::VectorXd theta;
  Eigen::VectorXd y;
};
Draw draw_observation(const ModelInstance& model, std::uint64_t seed, std::int64_t replicate);

}  // namespace memlab
