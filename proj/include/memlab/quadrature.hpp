#pragma once

#include <functional>
#include <vector>

namespace memlab {

// Nodes and weights for the physicists' Gauss-Hermite rule (weight e^{-x^2}).
struct GaussHermiteRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rules are cached per order; safe to call from several threads.
const GaussHermiteRule& gauss_hermite(int order);

// E_{tau ~ N(0,1)}[f(tau)] at a fixed rule order.
double expect_normal(const std::function<double(double)>& f, int order);

struct AdaptiveExpectation {
  double value = 0.0;
  int order = 0;         // accepted order
  double last_delta = 0.0;  // |change| at the final doubling
  bool converged = false;
};

// Doubles the order starting from `start` until successive values differ by
// less than `tol`, up to `max_order`.
AdaptiveExpectation expect_normal_adaptive(const std::function<double(double)>& f,
                                           double tol = 1e-10, int start = 64,
                                           int max_order = 8192);

// Romberg integration on [a, b] to a relative tolerance.
double romberg(const std::function<double(double)>& f, double a, double b,
               double rel_tol = 1e-10, int max_level = 22);

// Adaptive Simpson on [a, b] with an absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, int max_depth = 48);

}  // namespace memlab
