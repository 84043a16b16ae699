#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memlab/mc.hpp"

namespace memlab {

// The one-dimensional mixture 0.5 N(-c, eta) + 0.5 N(c, eta); adding noise t
// only shifts the component variance to eta + t. center = 0 is a diagnostic
// mode in which the mixture degenerates to a single Gaussian N(0, eta).
struct ScalarMixture {
  double eta = 0.05;
  double center = 1.0;

  void validate() const;
};

double scalar_log_density(const ScalarMixture& mix, double y, double t = 0.0);
double scalar_score(const ScalarMixture& mix, double y, double t = 0.0);
double scalar_log_density_hess(const ScalarMixture& mix, double y, double t = 0.0);

// Fisher information J(t) of the noised mixture by Gauss-Hermite quadrature,
// doubling the order from 64 until successive values differ by < tol.
double scalar_fisher(const ScalarMixture& mix, double t, double tol = 1e-10,
                     int* order_used = nullptr);
double scalar_fisher_fixed_order(const ScalarMixture& mix, double t, int order);

// Monte Carlo cross-check of the same expectation.
MonteCarloEstimate scalar_fisher_mc(const ScalarMixture& mix, double t, std::int64_t reps,
                                    std::uint64_t seed);

// -E[(d^2/dy^2 log p_t)^2], the derivative J'(t).
double scalar_fisher_derivative(const ScalarMixture& mix, double t, double tol = 1e-12);

// MMSE of the Gaussian channel at signal-to-noise s: E[Var(y'|y)] with
// y = y' + sqrt(1/s) noise; evaluated at a fixed quadrature order when
// order > 0.
double scalar_mmse(const ScalarMixture& mix, double s, int order = 0);

struct Figure2Row {
  double t = 0.0;
  double train = 0.0;
  double train_over_t = 0.0;
  double train_over_t2 = 0.0;
  double j = 0.0;
  double jprime = 0.0;
};
std::vector<Figure2Row> figure2_curves(const ScalarMixture& mix, const std::vector<double>& grid);
std::string figure2_csv(const std::vector<Figure2Row>& rows,
                        const std::vector<std::string>& header_comments = {});

struct MmseDerivative {
  double analytic = 0.0;  // -E[Var(y'|y)^2]
  double fd = 0.0;        // central difference of s -> 1/s - Train(1/s) evaluated at 1/t
};
MmseDerivative mmse_derivative_check(const ScalarMixture& mix, double s);

struct Sigma6Expansion {
  double j0 = 0.0;
  double jprime0 = 0.0;
  double max_t_valid = 0.0;
};
// max_t_valid is the largest grid value below which the cubic expansion
// Train = t^2 J(0) + t^3 J'(0) holds within 5% of the cubic term.
Sigma6Expansion sigma6_expansion_check(const ScalarMixture& mix);
Sigma6Expansion sigma6_expansion_check(const ScalarMixture& mix, const std::vector<double>& grid,
                                       double tolerance);

}  // namespace memlab
