#include "memlab/bayes.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "memlab/errors.hpp"
#include "memlab/rng.hpp"

namespace memlab {

Eigen::VectorXd posterior_mean(const ModelInstance& model, const Eigen::VectorXd& y) {
  if (y.size() != model.n()) throw std::invalid_argument("posterior_mean: y has wrong length");
  const double t = model.sigma2();
  if (model.mixture()) {
    const auto& mix = model.sparse_mixture();
    return mix.posterior_mean_theta(y, t, *mix.context(t));
  }
  // theta = Omega X' (X Omega X' + sigma^2 I)^{-1} y with Omega diagonal.
  const auto& push = model.gaussian();
  Eigen::VectorXd v = push.solve_shifted(y, t);
  Eigen::VectorXd omega = model.prior().covariance_diagonal();
  return omega.asDiagonal() * (model.design().entries().transpose() * v);
}

Eigen::VectorXd fitted_values_tweedie(const ModelInstance& model, const Eigen::VectorXd& y) {
  if (y.size() != model.n())
    throw std::invalid_argument("fitted_values_tweedie: y has wrong length");
  const double t = model.sigma2();
  if (model.mixture()) {
    const auto& mix = model.sparse_mixture();
    auto eval = mix.evaluate(y, *mix.context(t));
    return y + t * eval.score;
  }
  return y + t * model.gaussian().score(y, t);
}

double train_error_exact(const Eigen::VectorXd& pushforward_eigenvalues, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("train_error_exact: sigma2 must be positive");
  double t = sigma2;
  return t * t *
         (pushforward_eigenvalues.array() + t).inverse().mean();
}

double train_error_exact(const ModelInstance& model) {
  if (model.mixture())
    throw UnsupportedPriorError("train_error_exact: sparse mixture has no spectral formula; "
                                "use train_error_mc");
  return train_error_exact(model.gaussian().eigenvalues(), model.sigma2());
}

Draw draw_observation(const ModelInstance& model, std::uint64_t seed, std::int64_t replicate) {
  std::mt19937_64 rng = make_rng(seed, static_cast<std::uint64_t>(replicate));
  Draw draw;
  draw.theta = sample_theta(model.prior(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd tau(model.n());
  for (int i = 0; i < model.n(); ++i) tau[i] = normal(rng);
  draw.y = model.design().entries() * draw.theta + std::sqrt(model.sigma2()) * tau;
  return draw;
}

MonteCarloEstimate train_error_mc(const ModelInstance& model, std::int64_t reps,
                                  std::uint64_t seed) {
  if (reps < 100) throw std::invalid_argument("train_error_mc: reps must be at least 100");
  const Eigen::MatrixXd& X = model.design().entries();
  return run_replicates(reps, seed, [&](std::int64_t i) {
    Draw draw = draw_observation(model, seed, i);
    Eigen::VectorXd fitted = X * posterior_mean(model, draw.y);
    return (fitted - draw.y).squaredNorm() / model.n();
  });
}

Estimator make_estimator(const ModelInstance& model, const std::string& name) {
  if (name == "bayes") {
    return [&model](const Eigen::VectorXd& y) { return posterior_mean(model, y); };
  }
  const DesignMatrix& design = model.design();
  if (name == "minnorm") {
    return [&design](const Eigen::VectorXd& y) {
      Eigen::VectorXd z = design.gram_basis().transpose() * y;
      z.array() /= design.gram_eigenvalues().array();
      return Eigen::VectorXd(design.entries().transpose() * (design.gram_basis() * z));
    };
  }
  if (name.rfind("ridge:", 0) == 0) {
    double lambda = std::stod(name.substr(6));
    if (!(lambda > 0.0)) throw std::invalid_argument("ridge regularization must be positive");
    return [&design, lambda](const Eigen::VectorXd& y) {
      Eigen::VectorXd z = design.gram_basis().transpose() * y;
      z.array() /= (design.gram_eigenvalues().array() + lambda);
      return Eigen::VectorXd(design.entries().transpose() * (design.gram_basis() * z));
    };
  }
  throw std::invalid_argument("unknown estimator '" + name +
                              "'; expected bayes, ridge:<lambda>, or minnorm");
}

PredCost pred_and_cost(const ModelInstance& model, const Estimator& estimator, std::int64_t reps,
                       std::uint64_t seed) {
  auto stats = run_replicates_multi(reps, seed, 3, [&](std::int64_t i, double* out) {
    Draw draw = draw_observation(model, seed, i);
    Eigen::VectorXd theta_hat = estimator(draw.y);
    Eigen::VectorXd bayes = posterior_mean(model, draw.y);
    Eigen::VectorXd gap = theta_hat - bayes;
    out[0] = model.sigma_norm2(theta_hat - draw.theta);
    out[1] = model.sigma_norm2(gap);
    out[2] = model.sigma_inner(gap, bayes - draw.theta);
  });
  return PredCost{stats[0], stats[1], stats[2]};
}

std::vector<ComparisonRow> compare_estimators(const ModelInstance& model,
                                              const std::vector<std::string>& names,
                                              std::int64_t reps, std::uint64_t seed) {
  std::vector<Estimator> estimators;
  estimators.reserve(names.size());
  for (const auto& name : names) estimators.push_back(make_estimator(model, name));

  const int per = 4;  // train, pred, cost, cross
  const int stats = per * static_cast<int>(names.size());
  const Eigen::MatrixXd& X = model.design().entries();
  auto flat = run_replicates_multi(reps, seed, stats, [&](std::int64_t i, double* out) {
    Draw draw = draw_observation(model, seed, i);
    Eigen::VectorXd bayes = posterior_mean(model, draw.y);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      Eigen::VectorXd theta_hat = estimators[e](draw.y);
      Eigen::VectorXd gap = theta_hat - bayes;
      out[per * e + 0] = (X * theta_hat - draw.y).squaredNorm() / model.n();
      out[per * e + 1] = model.sigma_norm2(theta_hat - draw.theta);
      out[per * e + 2] = model.sigma_norm2(gap);
      out[per * e + 3] = model.sigma_inner(gap, bayes - draw.theta);
    }
  });

  std::vector<ComparisonRow> rows;
  rows.reserve(names.size());
  for (std::size_t e = 0; e < names.size(); ++e) {
    ComparisonRow row;
    row.name = names[e];
    row.train = flat[per * e + 0];
    row.stats = PredCost{flat[per * e + 1], flat[per * e + 2], flat[per * e + 3]};
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace memlab
