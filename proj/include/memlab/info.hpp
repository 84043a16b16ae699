#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memlab/mc.hpp"
#include "memlab/model.hpp"

namespace memlab {

// The determining parameters of a model: Fisher parameter J, variance
// parameter V, and the design scale lambda_Sigma. For the sparse mixture J
// carries a Monte Carlo standard error; exact values have j_stderr = 0.
struct InfoParams {
  double j_pi = 0.0;
  double v_pi = 0.0;
  double lambda_sigma = 0.0;
  double j_stderr = 0.0;
  std::int64_t j_replicates = 0;
  std::uint64_t seed = 0;
};

// Exact route (single-Gaussian priors only). Throws SingularPushforwardError
// when the pushforward spectrum has smallest eigenvalue < 1e-14 * largest.
InfoParams compute_info_params(const ModelInstance& model);

// Monte Carlo Fisher parameter for the sparse mixture; V stays exact via the
// mixture-averaged covariance.
InfoParams compute_info_params(const ModelInstance& model, std::int64_t reps, std::uint64_t seed);

// Thm-2 sandwich: (sigma^4/(V+sigma^2), sigma^4/(J^{-1}+sigma^2)).
std::pair<double, double> bayes_train_bounds(const InfoParams& params, double sigma2);

// Piecewise excess-prediction-error lower bound given a measured training error.
double cost_lower_bound(const InfoParams& params, double sigma2, double train_value);

enum class Regime { MemorizationNecessary, OverfittingHarmful, Neither };
std::string regime_label(Regime regime);
Regime classify_regime(const InfoParams& params, double sigma2);

enum class CurveProvenance { Exact, MonteCarlo, Quadrature };
std::string to_string(CurveProvenance provenance);

struct NoiseCurvePoint {
  double sigma2 = 0.0;
  double train = 0.0;
  double train_se = 0.0;
  double j = 0.0;
  double jprime = 0.0;
  double jprime_se = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  Regime regime = Regime::Neither;
};

struct NoiseCurve {
  std::vector<NoiseCurvePoint> points;
  CurveProvenance provenance = CurveProvenance::Exact;
  std::string to_csv(const std::vector<std::string>& header_comments = {}) const;
};

// Exact curve for single-Gaussian priors: Train(t) = t^2 (1/n) sum 1/(l_i+t),
// J = Train/t^2, J'(t) = -(1/n) sum 1/(l_i+t)^2.
NoiseCurve noise_curve(const ModelInstance& model, const std::vector<double>& grid,
                       bool with_jprime);

// Monte Carlo curve for the sparse mixture; J' uses the exact mixture Hessian
// per draw.
NoiseCurve noise_curve(const ModelInstance& model, const std::vector<double>& grid,
                       bool with_jprime, std::int64_t reps, std::uint64_t seed);

// Logarithmic grid; defaults match the asymptotic checks (1e-6 .. 1e4, 25 points).
std::vector<double> log_grid(double lo = 1e-6, double hi = 1e4, int points = 25);

}  // namespace memlab
