#include "memlab/scalar_lab.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "memlab/io.hpp"
#include "memlab/quadrature.hpp"
#include "memlab/rng.hpp"

namespace memlab {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// sech^2 without overflow; exact 0 in the saturated tails.
double sech2(double x) {
  double a = std::abs(x);
  if (a > 360.0) return 0.0;
  double e = std::exp(-a);
  double denom = 1.0 + e * e;
  double v = 2.0 * e / denom;
  return v * v;
}

}  // namespace

void ScalarMixture::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("ScalarMixture: eta must be positive");
  if (center < 0.0) throw std::invalid_argument("ScalarMixture: center must be nonnegative");
}

double scalar_log_density(const ScalarMixture& mix, double y, double t) {
  mix.validate();
  double s = mix.eta + t;
  double a = -0.5 * (y - mix.center) * (y - mix.center) / s;
  double b = -0.5 * (y + mix.center) * (y + mix.center) / s;
  double peak = std::max(a, b);
  return peak + std::log(0.5 * (std::exp(a - peak) + std::exp(b - peak))) -
         0.5 * std::log(2.0 * M_PI * s);
}

double scalar_score(const ScalarMixture& mix, double y, double t) {
  mix.validate();
  double s = mix.eta + t;
  return -(y - mix.center * std::tanh(mix.center * y / s)) / s;
}

double scalar_log_density_hess(const ScalarMixture& mix, double y, double t) {
  mix.validate();
  double s = mix.eta + t;
  double c = mix.center;
  return -(1.0 - c * c * sech2(c * y / s) / s) / s;
}

double scalar_fisher_fixed_order(const ScalarMixture& mix, double t, int order) {
  mix.validate();
  double s = mix.eta + t;
  double c = mix.center;
  if (c == 0.0) return 1.0 / s;
  double expectation =
      expect_normal([&](double tau) { return sech2(c * (c + std::sqrt(s) * tau) / s); }, order);
  return 1.0 / s - c * c / (s * s) * expectation;
}

double scalar_fisher(const ScalarMixture& mix, double t, double tol, int* order_used) {
  mix.validate();
  double s = mix.eta + t;
  double c = mix.center;
  if (c == 0.0) {
    if (order_used) *order_used = 0;
    return 1.0 / s;
  }
  auto integrand = [&](double tau) { return sech2(c * (c + std::sqrt(s) * tau) / s); };
  // The tolerance applies to J itself; the expectation enters scaled by c^2/s^2.
  double scale = c * c / (s * s);
  AdaptiveExpectation adaptive = expect_normal_adaptive(integrand, tol / std::max(scale, 1e-300));
  if (order_used) *order_used = adaptive.order;
  return 1.0 / s - scale * adaptive.value;
}

MonteCarloEstimate scalar_fisher_mc(const ScalarMixture& mix, double t, std::int64_t reps,
                                    std::uint64_t seed) {
  mix.validate();
  return run_replicates(reps, seed, [&](std::int64_t i) {
    std::mt19937_64 rng = make_rng(seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal(0.0, 1.0);
    double sign = (rng() & 1ULL) ? 1.0 : -1.0;
    double y = sign * mix.center + std::sqrt(mix.eta + t) * normal(rng);
    double score = scalar_score(mix, y, t);
    return score * score;
  });
}

double scalar_fisher_derivative(const ScalarMixture& mix, double t, double tol) {
  mix.validate();
  double s = mix.eta + t;
  double c = mix.center;
  if (c == 0.0) return -1.0 / (s * s);
  auto integrand = [&](double tau) {
    double h = 1.0 - c * c * sech2(c * (c + std::sqrt(s) * tau) / s) / s;
    return h * h;
  };
  AdaptiveExpectation adaptive =
      expect_normal_adaptive(integrand, tol * std::max(1.0, s * s));
  return -adaptive.value / (s * s);
}

double scalar_mmse(const ScalarMixture& mix, double s, int order) {
  mix.validate();
  if (!(s > 0.0)) throw std::invalid_argument("scalar_mmse: snr must be positive");
  double t = 1.0 / s;
  double st = mix.eta + t;
  double c = mix.center;
  double base = mix.eta * t / st;  // within-component posterior variance
  if (c == 0.0) return base;
  auto variance = [&](double y) {
    double gap = 2.0 * c * t / st;
    return base + 0.25 * sech2(c * y / st) * gap * gap;
  };
  auto integrand = [&](double tau) { return variance(c + std::sqrt(st) * tau); };
  if (order > 0) return expect_normal(integrand, order);
  return expect_normal_adaptive(integrand, 1e-12 * std::max(1.0, base)).value;
}

std::vector<Figure2Row> figure2_curves(const ScalarMixture& mix,
                                       const std::vector<double>& grid) {
  mix.validate();
  if (grid.empty()) throw std::invalid_argument("figure2_curves: empty grid");
  double prev = 0.0;
  for (double t : grid) {
    if (!(t > prev)) throw std::invalid_argument("figure2_curves: grid must be ascending positive");
    prev = t;
  }
  std::vector<Figure2Row> rows;
  rows.reserve(grid.size());
  for (double t : grid) {
    Figure2Row row;
    row.t = t;
    row.j = scalar_fisher(mix, t);
    row.jprime = scalar_fisher_derivative(mix, t);
    row.train = t * t * row.j;
    row.train_over_t = t * row.j;
    row.train_over_t2 = row.j;
    rows.push_back(row);
  }
  return rows;
}

std::string figure2_csv(const std::vector<Figure2Row>& rows,
                        const std::vector<std::string>& header_comments) {
  std::ostringstream os;
  for (const auto& comment : header_comments) os << "# " << comment << "\n";
  os << "t,train,train_over_t,train_over_t2,j,jprime\n";
  for (const auto& row : rows) {
    os << format_g17(row.t) << "," << format_g17(row.train) << ","
       << format_g17(row.train_over_t) << "," << format_g17(row.train_over_t2) << ","
       << format_g17(row.j) << "," << format_g17(row.jprime) << "\n";
  }
  return os.str();
}

MmseDerivative mmse_derivative_check(const ScalarMixture& mix, double s) {
  mix.validate();
  if (!(s > 0.0)) throw std::invalid_argument("mmse_derivative_check: snr must be positive");

  MmseDerivative out;
  {
    double t = 1.0 / s;
    double st = mix.eta + t;
    double c = mix.center;
    double base = mix.eta * t / st;
    auto variance_sq = [&](double y) {
      double gap = 2.0 * c * t / st;
      double v = base + 0.25 * sech2(c * y / st) * gap * gap;
      return v * v;
    };
    auto integrand = [&](double tau) { return variance_sq(c + std::sqrt(st) * tau); };
    out.analytic = -expect_normal_adaptive(integrand, 1e-13 * std::max(base * base, 1e-30)).value;
  }

  // Finite difference of mmse(s) = 1/s - Train(1/s), sharing one quadrature
  // order across both sides so the quadrature error cancels in the difference.
  double h = 1e-4 * s;
  int order = 0;
  scalar_fisher(mix, 1.0 / s, 1e-13, &order);
  order = std::min(4 * std::max(order, 64), 8192);
  auto mmse_at = [&](double snr) {
    double t = 1.0 / snr;
    return t - t * t * scalar_fisher_fixed_order(mix, t, order);
  };
  out.fd = (mmse_at(s + h) - mmse_at(s - h)) / (2.0 * h);
  return out;
}

Sigma6Expansion sigma6_expansion_check(const ScalarMixture& mix) {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(std::pow(10.0, -5.0 + 6.0 * i / 100.0));
  return sigma6_expansion_check(mix, grid, 0.05);
}

Sigma6Expansion sigma6_expansion_check(const ScalarMixture& mix, const std::vector<double>& grid,
                                       double tolerance) {
  mix.validate();
  Sigma6Expansion out;
  out.j0 = scalar_fisher(mix, 0.0, 1e-12);
  out.jprime0 = scalar_fisher_derivative(mix, 0.0);
  out.max_t_valid = 0.0;
  for (double t : grid) {
    double train = t * t * scalar_fisher(mix, t, 1e-12);
    double cubic = t * t * t * out.jprime0;
    double residual = std::abs(train - t * t * out.j0 - cubic);
    if (residual <= tolerance * std::abs(cubic)) {
      out.max_t_valid = t;
    } else {
      break;
    }
  }
  return out;
}

}  // namespace memlab
