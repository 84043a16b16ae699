#include "memlab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <vector>

#include "memlab/bayes.hpp"
#include "memlab/harness.hpp"
#include "memlab/info.hpp"
#include "memlab/rmt.hpp"
#include "memlab/rng.hpp"
#include "memlab/scalar_lab.hpp"

namespace memlab {

namespace {

struct Criterion {
  int id;
  std::string label;
  double time_limit;  // seconds; 0 = none stated
  std::function<bool(std::string&)> body;
};

bool within_rel(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(7);
  os << v;
  return os.str();
}

// 1. Isotropic limits at gamma = 4, five seeds, 5% bands.
bool criterion_isotropic_limits(std::string& detail) {
  const int n = 200, d = 800, seeds = 5;
  double j = 0.0, v = 0.0, l = 0.0;
  for (int i = 0; i < seeds; ++i) {
    ModelInstance model(make_design(n, d, EntryLaw::Gaussian, 101 + i), PriorSpec::isotropic(d),
                        1.0);
    InfoParams p = compute_info_params(model);
    j += p.j_pi / seeds;
    v += p.v_pi / seeds;
    l += p.lambda_sigma / seeds;
  }
  detail = "J=" + fmt(j) + " V=" + fmt(v) + " lambda=" + fmt(l);
  return within_rel(j, 4.0 / 3.0, 0.05) && within_rel(v, 1.0, 0.05) && within_rel(l, 9.0, 0.05);
}

// 2. Sandwich bound, 20 random Gaussian-prior models x 25 noise levels.
bool criterion_sandwich(std::string& detail) {
  std::vector<double> grid = log_grid(1e-6, 1e4, 25);
  int violations = 0;
  for (int i = 0; i < 20; ++i) {
    ModelInstance model = random_gaussian_model(2024, i, 100);
    InfoParams params = compute_info_params(model);
    for (double t : grid) {
      double train = train_error_exact(model.gaussian().eigenvalues(), t);
      auto [lower, upper] = bayes_train_bounds(params, t);
      double slack = 1e-10 * std::max(1.0, train);
      if (train < lower - slack || train > upper + slack) ++violations;
    }
  }
  detail = std::to_string(violations) + " violations over 500 evaluations";
  return violations == 0;
}

// 3. Low- and high-noise asymptotics on the same model family.
bool criterion_asymptotics(std::string& detail) {
  double worst_low = 0.0, worst_high = 0.0;
  for (int i = 0; i < 20; ++i) {
    ModelInstance model = random_gaussian_model(2024, i, 100);
    InfoParams params = compute_info_params(model);
    double low = train_error_exact(model.gaussian().eigenvalues(), 1e-6);
    worst_low = std::max(worst_low, std::abs(low / 1e-12 - params.j_pi) / params.j_pi);
    double high = train_error_exact(model.gaussian().eigenvalues(), 1e4);
    worst_high = std::max(worst_high, std::abs(1e4 - high - params.v_pi));
  }
  detail = "max |Train/s^4 - J|/J = " + fmt(worst_low) +
           ", max |s^2 - Train - V| = " + fmt(worst_high);
  return worst_low <= 1e-3 && worst_high <= 1e-3;
}

// 4. Cost lower bound for the estimator zoo; Bayes cost is zero.
bool criterion_cost_bounds(std::string& detail) {
  const int n = 50, d = 200;
  const double sigma2 = 0.5;
  ModelInstance model(make_design(n, d, EntryLaw::Gaussian, 424242), PriorSpec::isotropic(d),
                      sigma2);
  InfoParams params = compute_info_params(model);
  std::vector<std::string> names = {"bayes"};
  double lambda_star = d * sigma2;
  for (int i = 0; i < 8; ++i) {
    double factor = std::pow(10.0, -2.0 + 4.0 * i / 7.0);
    names.push_back("ridge:" + fmt(lambda_star * factor));
  }
  auto rows = compare_estimators(model, names, 100000, 77007);
  int violations = 0;
  double bayes_cost = 0.0, bayes_se = 0.0;
  for (const auto& row : rows) {
    double bound = cost_lower_bound(params, sigma2, row.train.value);
    if (row.stats.cost.value < bound - 4.0 * row.stats.cost.stderr_) ++violations;
    if (row.name == "bayes") {
      bayes_cost = row.stats.cost.value;
      bayes_se = row.stats.cost.stderr_;
    }
  }
  detail = std::to_string(violations) + " bound violations; bayes cost=" + fmt(bayes_cost);
  return violations == 0 && std::abs(bayes_cost) <= 4.0 * bayes_se + 1e-18;
}

// 5. Generalized MP fixed point vs the closed-form resolvent root, plus the
//    small-eta regime asymptotes.
bool criterion_stieltjes(std::string& detail) {
  std::mt19937_64 rng = make_rng(505, 0);
  std::uniform_real_distribution<double> gamma_draw(1.1, 10.0), rho_draw(0.1, 5.0),
      eta_draw(0.01, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    double gamma = 0.0, rho = 0.0;
    do {  // the rank cannot exceed the ambient dimension
      gamma = gamma_draw(rng);
      rho = rho_draw(rng);
    } while (rho > gamma);
    double eta = eta_draw(rng);
    double closed = lowrank_limit_params(gamma, rho, eta).j_limit;
    StieltjesSolution sol = solve_stieltjes(PopulationSpectrum::low_rank(gamma, rho, eta), gamma,
                                            0.0);
    if (!sol.converged) {
      detail = "fixed point failed to converge";
      return false;
    }
    worst = std::max(worst, std::abs(sol.m - closed) / std::max(1.0, std::abs(closed)));
  }
  bool regimes = true;
  const double gamma = 4.0, eta = 1e-4;
  for (auto [rho, tol] : std::vector<std::pair<double, double>>{{0.5, 0.1}, {1.0, 0.1}, {2.0, 0.02}}) {
    LowRankLimit lim = lowrank_limit_params(gamma, rho, eta);
    if (!within_rel(lim.j_limit, lim.eta_zero_leading, tol)) regimes = false;
  }
  detail = "max |fixed point - closed form| = " + fmt(worst) + (regimes ? "" : "; regime miss");
  return worst <= 1e-9 && regimes;
}

// 6. Exact low-rank training error vs the two-term expansion.
bool criterion_lowrank_exact(std::string& detail) {
  const int n = 400, r = 200, d = 1600;
  const double rho = 0.5;
  bool pass = true;
  detail.clear();
  for (double sigma2 : {0.01, 0.05}) {
    LowRankTrainLimit limit = exact_lowrank_train_limit(rho, sigma2);
    double mean = 0.0;
    for (int i = 0; i < 5; ++i) {
      ModelInstance model(make_design(n, d, EntryLaw::Gaussian, 606 + i),
                          PriorSpec::low_rank(d, r, 0.0), sigma2);
      mean += train_error_exact(model) / 5.0;
    }
    double rel = std::abs(mean - limit.expansion) / limit.expansion;
    detail += "s2=" + fmt(sigma2) + ":rel=" + fmt(rel) + " ";
    if (!(rel <= 0.01)) pass = false;
  }
  return pass;
}

// 7. Sparse-mixture Fisher bounds: formula values, finite-n band, and the
//    large-gamma limit.
bool criterion_sparse_fisher(std::string& detail) {
  FisherBounds bounds = sparse_fisher_bounds(4.0, 0.1);
  double lower_expected = 10.0 * std::exp(1.0) * 0.421875;  // (1/eta) e (3/4)^3
  double upper_expected = 40.0 / 3.0;
  if (!within_rel(bounds.lower, lower_expected, 1e-12) ||
      !within_rel(bounds.upper, upper_expected, 1e-12)) {
    detail = "formula mismatch";
    return false;
  }
  FisherBounds wide = sparse_fisher_bounds(1e6, 0.1);
  if (!within_rel(wide.lower, 10.0, 1e-4) || !within_rel(wide.upper, 10.0, 1e-4)) {
    detail = "gamma -> infinity limit misses 1/eta";
    return false;
  }
  const int n = 40, d = 160, K = 2;
  ModelInstance model(make_design(n, d, EntryLaw::Gaussian, 707),
                      PriorSpec::sparse_mixture(d, K, 0.1), 0.5);
  InfoParams params = compute_info_params(model, 100000, 70707);
  detail = "bounds=(" + fmt(bounds.lower) + ", " + fmt(bounds.upper) + ") J_mc=" +
           fmt(params.j_pi) + " se=" + fmt(params.j_stderr);
  return params.j_pi >= 0.8 * bounds.lower && params.j_pi <= 1.2 * bounds.upper;
}

// 8. Figure-2 shape checks for the scalar mixture.
bool criterion_figure2(std::string& detail) {
  ScalarMixture mix{0.05, 1.0};
  std::vector<Figure2Row> rows = figure2_curves(mix, log_grid(1e-3, 10.0, 120));
  int up = 0, down = 0;
  bool interior_max = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].train < rows[i - 1].train * (1.0 - 1e-12)) ++up;
    if (rows[i].train_over_t2 > rows[i - 1].train_over_t2 * (1.0 + 1e-12)) ++down;
    if (i + 1 < rows.size() && rows[i].train_over_t > rows[i - 1].train_over_t &&
        rows[i].train_over_t > rows[i + 1].train_over_t)
      interior_max = true;
  }
  detail = std::to_string(up) + " train decreases, " + std::to_string(down) +
           " J increases, interior max " + (interior_max ? "found" : "missing");
  return up == 0 && down == 0 && interior_max;
}

// 9. MMSE derivative: analytic vs finite difference.
bool criterion_mmse_derivative(std::string& detail) {
  ScalarMixture mix{0.05, 1.0};
  bool pass = true;
  detail.clear();
  for (double s : {0.1, 1.0, 10.0}) {
    MmseDerivative der = mmse_derivative_check(mix, s);
    double rel = std::abs(der.analytic - der.fd) / std::abs(der.analytic);
    detail += "s=" + fmt(s) + ":rel=" + fmt(rel) + " ";
    if (!(rel <= 1e-5)) pass = false;
  }
  return pass;
}

// 10. Cubic expansion of the training error, plus the Gaussian closed form.
bool criterion_sigma6(std::string& detail) {
  bool pass = true;
  detail.clear();
  for (double eta : {0.05, 1.0}) {
    Sigma6Expansion expansion = sigma6_expansion_check(ScalarMixture{eta, 1.0});
    detail += "eta=" + fmt(eta) + ":max_t=" + fmt(expansion.max_t_valid) + " ";
    if (!(expansion.max_t_valid >= 1e-4)) pass = false;
  }
  Sigma6Expansion gauss = sigma6_expansion_check(ScalarMixture{0.05, 0.0});
  if (!within_rel(gauss.j0, 20.0, 1e-9) || !within_rel(gauss.jprime0, -400.0, 1e-9)) {
    pass = false;
    detail += "gaussian closed form miss";
  }
  return pass;
}

// 11. Tweedie identity across random Gaussian models.
bool criterion_tweedie(std::string& detail) {
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    ModelInstance model = random_gaussian_model(1111, i, 60);
    std::mt19937_64 rng = make_rng(1111, 0x9000 + i);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd y(model.n());
    for (int k = 0; k < model.n(); ++k) y[k] = normal(rng);
    Eigen::VectorXd via_tweedie = fitted_values_tweedie(model, y);
    Eigen::VectorXd via_posterior = model.design().entries() * posterior_mean(model, y);
    double rel = (via_tweedie - via_posterior).norm() / y.norm();
    worst = std::max(worst, rel);
    if (rel > 1e-8) ++violations;
  }
  detail = std::to_string(violations) + " failures, worst rel gap " + fmt(worst);
  return violations == 0;
}

}  // namespace

int run_acceptance(std::ostream& out) {
  std::vector<Criterion> criteria = {
      {1, "isotropic-limits", 30.0, criterion_isotropic_limits},
      {2, "train-error-sandwich", 10.0, criterion_sandwich},
      {3, "noise-asymptotics", 0.0, criterion_asymptotics},
      {4, "cost-lower-bounds", 120.0, criterion_cost_bounds},
      {5, "stieltjes-fixed-point", 5.0, criterion_stieltjes},
      {6, "exact-lowrank-train", 30.0, criterion_lowrank_exact},
      {7, "sparse-fisher-bounds", 120.0, criterion_sparse_fisher},
      {8, "figure2-shape", 5.0, criterion_figure2},
      {9, "mmse-derivative", 0.0, criterion_mmse_derivative},
      {10, "sigma6-expansion", 0.0, criterion_sigma6},
      {11, "tweedie-identity", 0.0, criterion_tweedie},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = criterion.body(detail);
    } catch (const std::exception& err) {
      pass = false;
      detail = std::string("exception: ") + err.what();
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count();
    bool in_time = criterion.time_limit <= 0.0 || elapsed <= criterion.time_limit;
    if (!in_time) detail += " [over time limit " + fmt(criterion.time_limit) + "s]";
    bool ok = pass && in_time;
    if (!ok) ++failures;
    out << (ok ? "[PASS] " : "[FAIL] ") << std::setw(2) << criterion.id << " "
        << criterion.label << "  (" << std::fixed << std::setprecision(2) << elapsed << "s)  "
        << detail << std::endl;
    out.unsetf(std::ios_base::floatfield);
  }
  out << (failures == 0 ? "acceptance: all criteria passed\n"
                        : "acceptance: " + std::to_string(failures) + " criteria failed\n");
  return failures;
}

}  // namespace memlab
