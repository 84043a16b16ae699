#include "memlab/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace memlab {

namespace {

constexpr double kPiQuarterRoot = 0.7511255444649425;  // pi^{-1/4}
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrtPi = 0.5641895835477563;

// Orthonormal Hermite recurrence evaluated at x. Intermediate values reach
// exp(x^2/2) scales far outside double range for large orders, so the pair is
// carried with a power-of-two exponent; Newton needs only the ratio, and the
// values at a root are O(1), so the exponent cancels there.
void hermite_pair(int n, double x, double& pn, double& pnm1, int& exponent) {
  double p0 = kPiQuarterRoot;
  double p1 = kSqrt2 * x * p0;
  exponent = 0;
  if (n == 0) {
    pn = p0;
    pnm1 = 0.0;
    return;
  }
  for (int j = 1; j < n; ++j) {
    double p2 = x * std::sqrt(2.0 / (j + 1.0)) * p1 - std::sqrt(j / (j + 1.0)) * p0;
    p0 = p1;
    p1 = p2;
    double mag = std::max(std::abs(p0), std::abs(p1));
    if (mag > 0x1p+400) {
      p0 = std::ldexp(p0, -400);
      p1 = std::ldexp(p1, -400);
      exponent += 400;
    } else if (mag > 0.0 && mag < 0x1p-400) {
      p0 = std::ldexp(p0, 400);
      p1 = std::ldexp(p1, 400);
      exponent -= 400;
    }
  }
  pn = p1;
  pnm1 = p0;
}

// Nodes are the eigenvalues of the Jacobi matrix (zero diagonal, subdiagonal
// sqrt(j/2)), polished by two Newton steps; weights come from the recurrence.
GaussHermiteRule build_gauss_hermite(int n) {
  GaussHermiteRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 1);
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(0.5 * j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("gauss_hermite: tridiagonal eigenvalue solve failed");

  for (int i = 0; i < n; ++i) {
    double z = solver.eigenvalues()[i];
    double pn = 0.0, pnm1 = 0.0;
    int exponent = 0;
    for (int iter = 0; iter < 2; ++iter) {
      hermite_pair(n, z, pn, pnm1, exponent);
      z -= pn / (std::sqrt(2.0 * n) * pnm1);  // scale-invariant ratio
    }
    hermite_pair(n, z, pn, pnm1, exponent);
    rule.nodes[i] = z;
    // w = 2 / (p'_n)^2 with p'_n = sqrt(2n) p_{n-1}; underflows to exact 0 in
    // the far tails, matching the true e^{-x^2} decay.
    double dp = std::sqrt(2.0 * n) * std::ldexp(pnm1, exponent);
    rule.weights[i] = 2.0 / (dp * dp);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_gauss_hermite(order)).first;
  return it->second;
}

double expect_normal(const std::function<double(double)>& f, int order) {
  const GaussHermiteRule& rule = gauss_hermite(order);
  double acc = 0.0;
  for (int i = 0; i < rule.order; ++i) {
    if (rule.weights[i] == 0.0) continue;
    acc += rule.weights[i] * f(kSqrt2 * rule.nodes[i]);
  }
  return kInvSqrtPi * acc;
}

AdaptiveExpectation expect_normal_adaptive(const std::function<double(double)>& f, double tol,
                                           int start, int max_order) {
  AdaptiveExpectation result;
  double prev = expect_normal(f, start);
  int order = start;
  while (order * 2 <= max_order) {
    order *= 2;
    double next = expect_normal(f, order);
    result.last_delta = std::abs(next - prev);
    prev = next;
    if (result.last_delta < tol) {
      result.converged = true;
      break;
    }
  }
  result.value = prev;
  result.order = order;
  return result;
}

double romberg(const std::function<double(double)>& f, double a, double b, double rel_tol,
               int max_level) {
  std::vector<double> row(max_level + 1, 0.0), prev_row(max_level + 1, 0.0);
  double h = b - a;
  prev_row[0] = 0.5 * h * (f(a) + f(b));
  std::int64_t intervals = 1;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    intervals *= 2;
    double sum = 0.0;
    for (std::int64_t i = 1; i < intervals; i += 2) sum += f(a + i * h);
    row[0] = 0.5 * prev_row[0] + h * sum;
    double factor = 1.0;
    for (int k = 1; k <= level; ++k) {
      factor *= 4.0;
      row[k] = row[k - 1] + (row[k - 1] - prev_row[k - 1]) / (factor - 1.0);
    }
    double best = row[level];
    double prev_best = prev_row[level - 1];
    if (level >= 4 &&
        std::abs(best - prev_best) <= rel_tol * std::max(std::abs(best), 1e-300)) {
      return best;
    }
    std::swap(row, prev_row);
  }
  return prev_row[max_level];
}

namespace {

double simpson_slice(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_recurse(const std::function<double(double)>& f, double a, double fa, double b,
                       double fb, double m, double fm, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_slice(a, fa, m, fm, flm);
  double right = simpson_slice(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson_slice(a, fa, b, fb, fm);
  return simpson_recurse(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

}  // namespace memlab
