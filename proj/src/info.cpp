#include "memlab/info.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "memlab/bayes.hpp"
#include "memlab/errors.hpp"
#include "memlab/io.hpp"
#include "memlab/rng.hpp"

namespace memlab {

InfoParams compute_info_params(const ModelInstance& model) {
  if (model.mixture())
    throw UnsupportedPriorError(
        "compute_info_params: sparse mixture needs the Monte Carlo overload");
  const auto& push = model.gaussian();
  const Eigen::VectorXd& evals = push.eigenvalues();
  if (evals[evals.size() - 1] < 1e-14 * evals[0])
    throw SingularPushforwardError("pushforward spectrum is numerically singular");
  InfoParams params;
  params.j_pi = push.fisher_trace(0.0);
  params.v_pi = push.mean_eigenvalue();
  params.lambda_sigma = model.lambda_sigma();
  return params;
}

InfoParams compute_info_params(const ModelInstance& model, std::int64_t reps,
                               std::uint64_t seed) {
  if (!model.mixture()) return compute_info_params(model);
  const auto& mix = model.sparse_mixture();
  auto ctx = mix.context(0.0);
  const Eigen::MatrixXd& X = model.design().entries();
  MonteCarloEstimate j = run_replicates(reps, seed, [&](std::int64_t i) {
    std::mt19937_64 rng = make_rng(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd theta = sample_theta(model.prior(), rng);
    Eigen::VectorXd y = X * theta;
    auto eval = mix.evaluate(y, *ctx);
    return eval.score.squaredNorm() / model.n();
  });
  InfoParams params;
  params.j_pi = j.value;
  params.j_stderr = j.stderr_;
  params.j_replicates = j.replicates;
  params.seed = seed;
  params.v_pi = mix.averaged().mean_eigenvalue();
  params.lambda_sigma = model.lambda_sigma();
  return params;
}

std::pair<double, double> bayes_train_bounds(const InfoParams& params, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("bayes_train_bounds: sigma2 must be positive");
  double lower = sigma2 * sigma2 / (params.v_pi + sigma2);
  double inv_j = params.j_pi > 0.0 ? 1.0 / params.j_pi : 0.0;
  double upper = sigma2 * sigma2 / (inv_j + sigma2);
  return {lower, upper};
}

double cost_lower_bound(const InfoParams& params, double sigma2, double train_value) {
  if (train_value < 0.0)
    throw std::invalid_argument("cost_lower_bound: train_value must be nonnegative");
  auto [lower, upper] = bayes_train_bounds(params, sigma2);
  double inv_lambda = 1.0 / params.lambda_sigma;
  if (train_value >= upper) {
    double gap = std::sqrt(train_value) - std::sqrt(upper);
    return inv_lambda * gap * gap;
  }
  if (train_value <= lower) {
    double gap = std::sqrt(lower) - std::sqrt(train_value);
    return inv_lambda * gap * gap;
  }
  return 0.0;
}

std::string regime_label(Regime regime) {
  switch (regime) {
    case Regime::MemorizationNecessary: return "memorization-necessary";
    case Regime::OverfittingHarmful: return "overfitting-harmful";
    case Regime::Neither: return "neither";
  }
  return "?";
}

Regime classify_regime(const InfoParams& params, double sigma2) {
  // Ties use the weak inequalities; J^{-1} <= V, so the first test wins at
  // a three-way tie.
  if (params.j_pi > 0.0 && sigma2 <= 1.0 / params.j_pi) return Regime::MemorizationNecessary;
  if (sigma2 >= params.v_pi) return Regime::OverfittingHarmful;
  return Regime::Neither;
}

std::string to_string(CurveProvenance provenance) {
  switch (provenance) {
    case CurveProvenance::Exact: return "exact";
    case CurveProvenance::MonteCarlo: return "monte-carlo";
    case CurveProvenance::Quadrature: return "quadrature";
  }
  return "?";
}

std::string NoiseCurve::to_csv(const std::vector<std::string>& header_comments) const {
  std::ostringstream os;
  for (const auto& comment : header_comments) os << "# " << comment << "\n";
  os << "# provenance: " << to_string(provenance) << "\n";
  os << "sigma2,train,train_se,j,jprime,lower_bound,upper_bound,regime_label\n";
  for (const auto& p : points) {
    os << format_g17(p.sigma2) << "," << format_g17(p.train) << "," << format_g17(p.train_se)
       << "," << format_g17(p.j) << "," << format_g17(p.jprime) << ","
       << format_g17(p.lower_bound) << "," << format_g17(p.upper_bound) << ","
       << regime_label(p.regime) << "\n";
  }
  return os.str();
}

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("noise_curve: empty grid");
  double prev = 0.0;
  for (double t : grid) {
    if (!(t > 0.0)) throw std::invalid_argument("noise_curve: grid values must be positive");
    if (t <= prev) throw std::invalid_argument("noise_curve: grid must be strictly ascending");
    prev = t;
  }
}

}  // namespace

NoiseCurve noise_curve(const ModelInstance& model, const std::vector<double>& grid,
                       bool with_jprime) {
  if (model.mixture())
    throw UnsupportedPriorError("noise_curve: sparse mixture needs the Monte Carlo overload");
  check_grid(grid);
  const auto& push = model.gaussian();
  const Eigen::VectorXd& evals = push.eigenvalues();

  double v_pi = push.mean_eigenvalue();
  bool invertible = evals[evals.size() - 1] >= 1e-14 * evals[0];
  InfoParams params;
  params.j_pi = invertible ? push.fisher_trace(0.0)
                           : std::numeric_limits<double>::infinity();
  params.v_pi = v_pi;
  params.lambda_sigma = model.lambda_sigma();

  NoiseCurve curve;
  curve.provenance = CurveProvenance::Exact;
  curve.points.reserve(grid.size());
  for (double t : grid) {
    NoiseCurvePoint p;
    p.sigma2 = t;
    p.train = train_error_exact(evals, t);
    p.j = p.train / (t * t);
    if (with_jprime) p.jprime = push.fisher_trace_derivative(t);
    double inv_j = std::isfinite(params.j_pi) && params.j_pi > 0.0 ? 1.0 / params.j_pi : 0.0;
    p.lower_bound = t * t / (v_pi + t);
    p.upper_bound = t * t / (inv_j + t);
    p.regime = std::isfinite(params.j_pi) ? classify_regime(params, t)
                                          : (t >= v_pi ? Regime::OverfittingHarmful
                                                       : Regime::Neither);
    curve.points.push_back(p);
  }
  return curve;
}

NoiseCurve noise_curve(const ModelInstance& model, const std::vector<double>& grid,
                       bool with_jprime, std::int64_t reps, std::uint64_t seed) {
  if (!model.mixture()) return noise_curve(model, grid, with_jprime);
  check_grid(grid);
  const auto& mix = model.sparse_mixture();
  const Eigen::MatrixXd& X = model.design().entries();
  InfoParams params = compute_info_params(model, reps, derive_seed(seed, 0x1afe));

  NoiseCurve curve;
  curve.provenance = CurveProvenance::MonteCarlo;
  curve.points.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double t = grid[g];
    auto ctx = mix.context(t);
    int stats = with_jprime ? 2 : 1;
    std::uint64_t point_seed = derive_seed(seed, g + 1);
    auto values =
        run_replicates_multi(reps, point_seed, stats, [&](std::int64_t i, double* out) {
          std::mt19937_64 rng = make_rng(point_seed, static_cast<std::uint64_t>(i));
          Eigen::VectorXd theta = sample_theta(model.prior(), rng);
          std::normal_distribution<double> normal(0.0, 1.0);
          Eigen::VectorXd y = X * theta;
          for (int k = 0; k < model.n(); ++k) y[k] += std::sqrt(t) * normal(rng);
          auto eval = mix.evaluate(y, *ctx);
          out[0] = eval.score.squaredNorm() / model.n();
          if (with_jprime)
            out[1] = mix.log_density_hessian(y, *ctx).squaredNorm() / model.n();
        });
    NoiseCurvePoint p;
    p.sigma2 = t;
    p.j = values[0].value;
    p.train = t * t * p.j;
    p.train_se = t * t * values[0].stderr_;
    if (with_jprime) {
      p.jprime = -values[1].value;
      p.jprime_se = values[1].stderr_;
    }
    auto [lower, upper] = bayes_train_bounds(params, t);
    p.lower_bound = lower;
    p.upper_bound = upper;
    p.regime = classify_regime(params, t);
    curve.points.push_back(p);
  }
  return curve;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw std::invalid_argument("log_grid: need 0 < lo < hi and points >= 2");
  std::vector<double> grid(points);
  double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(step * i);
  grid.back() = hi;
  return grid;
}

}  // namespace memlab
