#pragma once

#include <string>
#include <vector>

#include "memlab/spectral.hpp"

namespace memlab {

// Limit of the empirical spectral distribution of d * Omega (or of a test
// covariance): atoms only, total mass 1.
struct PopulationSpectrum {
  std::vector<SpectralAtom> atoms;

  void validate() const;
  double moment(int power) const;

  static PopulationSpectrum point_mass(double location);
  // e.s.d. limit of d * Omega for the rank-perturbed prior:
  // mass rho/gamma at gamma(1-eta)/rho + eta, mass 1 - rho/gamma at eta.
  static PopulationSpectrum low_rank(double gamma, double rho, double eta);
  // "location:mass, location:mass, ..." as written in config files.
  static PopulationSpectrum from_string(const std::string& text);
  std::string to_string() const;
};

struct MpFunctionals {
  double mean = 0.0;
  double inv_mean = 0.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
};

// Closed-form functionals of the Marchenko-Pastur law for gamma > 1.
MpFunctionals mp_functionals(double gamma);

struct StieltjesSolution {
  double z = 0.0;
  double m = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Damped fixed-point solve of m = -1/(z - int lambda/(1 + lambda m / gamma) dnu)
// on the negative real axis (z <= 0), where m is real and positive.
// Throws BranchAmbiguityError when two starts disagree by more than 1e-6;
// non-convergence is reported through the converged flag.
StieltjesSolution solve_stieltjes(const PopulationSpectrum& nu, double gamma, double z);

// Closed-form value of the generalized MP Stieltjes transform at z = 0 for
// the low-rank population spectrum, with the eta -> 0 regime classification.
struct LowRankLimit {
  double j_limit = 0.0;
  double v_limit = 1.0;
  double lambda_limit = 0.0;       // (1 + sqrt(gamma))^2
  std::string regime;              // underparameterized | interpolation-threshold | overparameterized
  double eta_zero_leading = 0.0;   // leading-order value of the regime asymptote
};
LowRankLimit lowrank_limit_params(double gamma, double rho, double eta);

// Limiting Bayes training error for the exact low-rank prior (rho < 1):
// sigma^4 m(-sigma^2) with 1/m = sigma^2 + 1/(1 + m/rho), plus the two-term
// small-noise expansion sigma^2 (1-rho) + sigma^4 rho^2/(1-rho).
struct LowRankTrainLimit {
  double value = 0.0;
  double expansion = 0.0;
};
LowRankTrainLimit exact_lowrank_train_limit(double rho, double sigma2);

struct FisherBounds {
  double lower = 0.0;
  double upper = 0.0;
};
// Asymptotic Fisher-parameter bounds for the sparse mixture (K/n -> 0).
FisherBounds sparse_fisher_bounds(double gamma, double eta);

struct SpectralEdges {
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  std::vector<double> interior;  // critical values between the extremes, ascending
  std::vector<double> roots_m;   // the corresponding transform values, one per edge/interior
};

// Support edges of the generalized MP limit: critical points of
// z(m) = -1/m + (1/gamma) int lambda/(1 + lambda m) dnu over m < 0,
// located by a sign-change scan of z'(m) plus bisection.
SpectralEdges spectral_edges(const PopulationSpectrum& nu, double gamma);

// CSV exports for solver results.
std::string stieltjes_trace_csv(const std::vector<StieltjesSolution>& solutions);
std::string edges_csv(const SpectralEdges& edges);

}  // namespace memlab
