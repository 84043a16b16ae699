#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "memlab/bayes.hpp"
#include "memlab/errors.hpp"
#include "memlab/harness.hpp"
#include "memlab/info.hpp"
#include "memlab/quadrature.hpp"
#include "memlab/rng.hpp"
#include "oracles.hpp"

using namespace memlab;

namespace {

ModelInstance scalar_unit_model(double sigma2) {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  return ModelInstance(DesignMatrix(one), PriorSpec::isotropic(1), sigma2);
}

}  // namespace

TEST_CASE("scalar witness parameters") {
  InfoParams p = compute_info_params(scalar_unit_model(1.0));
  CHECK(p.j_pi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.v_pi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.lambda_sigma == doctest::Approx(1.0).epsilon(1e-12));
  // Equality case of the variance/Fisher inequality.
  CHECK(p.v_pi * p.j_pi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("isotropic parameters approach the gamma = 4 limits") {
  // Both entry laws land on the same limits (only moments enter).
  for (EntryLaw law : {EntryLaw::Gaussian, EntryLaw::Rademacher}) {
    ModelInstance model(make_design(200, 800, law, 3), PriorSpec::isotropic(800), 1.0);
    InfoParams p = compute_info_params(model);
    CHECK(p.j_pi == doctest::Approx(4.0 / 3.0).epsilon(0.05));
    CHECK(p.v_pi == doctest::Approx(1.0).epsilon(0.05));
    CHECK(p.lambda_sigma == doctest::Approx(9.0).epsilon(0.05));
  }
}

TEST_CASE("variance-Fisher product never drops below one") {
  for (int k = 0; k < 30; ++k) {
    ModelInstance model = random_gaussian_model(17, k, 50);
    InfoParams p = compute_info_params(model);
    CHECK(p.v_pi * p.j_pi >= 1.0 - 1e-12);
    if (model.n() > 1) CHECK(p.v_pi * p.j_pi > 1.0 + 1e-9);  // anisotropic pushforward
  }
}

TEST_CASE("sparse mixture fisher parameter agrees with grid quadrature") {
  DesignMatrix X = make_design(2, 4, EntryLaw::Gaussian, 5);
  PriorSpec prior = PriorSpec::sparse_mixture(4, 1, 0.5);
  ModelInstance model(X, prior, 0.5);
  InfoParams mc = compute_info_params(model, 40000, 55);
  oracle::DenseMixture dense = oracle::dense_mixture(X, prior);
  double by_grid = oracle::fisher_grid_2d(dense, 9.0, 451);
  CHECK(std::abs(mc.j_pi - by_grid) <= 4.0 * mc.j_stderr);
  CHECK(mc.j_stderr > 0.0);
  CHECK(mc.v_pi ==
        doctest::Approx(X.gram_eigenvalues().sum() / 4.0 / 2.0).epsilon(1e-12));
}

TEST_CASE("singular pushforward is reported") {
  DesignMatrix X = make_design(4, 8, EntryLaw::Gaussian, 6);
  ModelInstance model(X, PriorSpec::low_rank(8, 2, 0.0), 0.5);
  CHECK_THROWS_AS(compute_info_params(model), SingularPushforwardError);
}

TEST_CASE("sandwich bounds") {
  InfoParams unit{1.0, 1.0, 1.0, 0.0, 0, 0};
  auto [lower, upper] = bayes_train_bounds(unit, 1.0);
  CHECK(lower == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(upper == doctest::Approx(0.5).epsilon(1e-14));

  InfoParams params{2.5, 1.7, 3.0, 0.0, 0, 0};
  for (double t : {1e-8, 1e-4, 1e-2}) {
    auto [lo, up] = bayes_train_bounds(params, t);
    CHECK(up / (t * t) == doctest::Approx(params.j_pi).epsilon(2.0 * t * params.j_pi));
    CHECK(lo <= up);
  }
  auto [lo_high, up_high] = bayes_train_bounds(InfoParams{1.0, 1.0, 1.0, 0.0, 0, 0}, 100.0);
  CHECK(lo_high == doctest::Approx(1e4 / 101.0).epsilon(1e-14));
  CHECK(up_high >= lo_high);
}

TEST_CASE("cost lower bound cases") {
  InfoParams params{2.0, 1.5, 4.0, 0.0, 0, 0};
  double sigma2 = 0.3;
  auto [lower, upper] = bayes_train_bounds(params, sigma2);

  CHECK(cost_lower_bound(params, sigma2, upper) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cost_lower_bound(params, sigma2, 0.5 * (lower + upper)) == 0.0);
  CHECK_THROWS_AS(cost_lower_bound(params, sigma2, -1.0), std::invalid_argument);

  // Too little memorization: linear-in-train lower bound.
  std::mt19937_64 rng = make_rng(77);
  std::uniform_real_distribution<double> c_draw(1.0 + 1e-6, 25.0);
  for (int k = 0; k < 1000; ++k) {
    double c = c_draw(rng);
    double j = 0.5 + 4.0 * (k % 17) / 17.0;
    double v = 1.0 / j + 0.5;  // keep V >= 1/J
    double lam = 1.0 + (k % 5);
    InfoParams p{j, v, lam, 0.0, 0, 0};
    double t = 0.9 / j;  // memorization-necessary regime
    double train = c * j * t * t;
    double bound = cost_lower_bound(p, t, train);
    double shrink = 1.0 - 1.0 / std::sqrt(c);
    CHECK(bound >= shrink * shrink / lam * train - 1e-12);

    // Too much overfitting: quadratic-in-overfit lower bound.
    double t_big = v * (1.0 + c);
    double train_low = t_big - c * v;
    double bound_low = cost_lower_bound(p, t_big, train_low);
    double factor = (1.0 - 1.0 / c);
    double overfit = t_big - train_low;
    CHECK(bound_low >= factor * factor / (4.0 * lam) * overfit * overfit / t_big - 1e-12);
  }
}

TEST_CASE("regime classification") {
  ModelInstance model(make_design(100, 400, EntryLaw::Gaussian, 8), PriorSpec::isotropic(400),
                      1.0);
  InfoParams p = compute_info_params(model);
  CHECK(classify_regime(p, 0.1) == Regime::MemorizationNecessary);
  CHECK(classify_regime(p, 10.0) == Regime::OverfittingHarmful);
  CHECK(classify_regime(p, 0.9) == Regime::Neither);
  CHECK(regime_label(Regime::Neither) == "neither");

  // Ties resolve through the weak inequalities.
  InfoParams unit{1.0, 1.0, 1.0, 0.0, 0, 0};
  CHECK(classify_regime(unit, 1.0) == Regime::MemorizationNecessary);
}

TEST_CASE("exact noise curve") {
  SUBCASE("single-eigenvalue closed form") {
    ModelInstance model = scalar_unit_model(1.0);
    std::vector<double> grid = log_grid(1e-3, 1e3, 13);
    NoiseCurve curve = noise_curve(model, grid, true);
    CHECK(curve.provenance == CurveProvenance::Exact);
    for (const auto& p : curve.points) {
      CHECK(p.j == doctest::Approx(1.0 / (1.0 + p.sigma2)).epsilon(1e-12));
      CHECK(p.jprime ==
            doctest::Approx(-1.0 / ((1.0 + p.sigma2) * (1.0 + p.sigma2))).epsilon(1e-12));
      CHECK(p.train == doctest::Approx(p.sigma2 * p.sigma2 * p.j).epsilon(1e-10));
    }
  }

  SUBCASE("monotonicity, sandwich, and asymptotics on random models") {
    for (int k = 0; k < 10; ++k) {
      ModelInstance model = random_gaussian_model(99, k, 60);
      NoiseCurve curve = noise_curve(model, log_grid(), true);
      InfoParams params = compute_info_params(model);
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        double slack = 1e-10 * std::max(1.0, p.train);
        CHECK(p.train >= p.lower_bound - slack);
        CHECK(p.train <= p.upper_bound + slack);
        if (i > 0) {
          CHECK(p.train >= curve.points[i - 1].train * (1.0 - 1e-12));
          CHECK(p.j <= curve.points[i - 1].j * (1.0 + 1e-12));
        }
      }
      CHECK(curve.points.front().train / 1e-12 ==
            doctest::Approx(params.j_pi).epsilon(1e-3));
      CHECK(std::abs(1e4 - curve.points.back().train - params.v_pi) <= 1e-3);
    }
  }

  SUBCASE("cubic term matches the derivative at zero") {
    ModelInstance model = random_gaussian_model(99, 3, 60);
    InfoParams params = compute_info_params(model);
    double jprime0 = model.gaussian().fisher_trace_derivative(0.0);
    // Scan for the largest grid point where the cubic expansion holds to 10%.
    double max_valid = 0.0;
    for (double t : log_grid(1e-8, 1.0, 60)) {
      double train = train_error_exact(model.gaussian().eigenvalues(), t);
      double cubic = t * t * t * jprime0;
      if (std::abs(train - t * t * params.j_pi - cubic) <= 0.1 * std::abs(cubic))
        max_valid = t;
      else if (max_valid > 0.0)
        break;
    }
    CHECK(max_valid > 0.0);
  }

  SUBCASE("grid validation") {
    ModelInstance model = scalar_unit_model(1.0);
    CHECK_THROWS_AS(noise_curve(model, {}, false), std::invalid_argument);
    CHECK_THROWS_AS(noise_curve(model, {1.0, 0.5}, false), std::invalid_argument);
    CHECK_THROWS_AS(noise_curve(model, {-1.0, 0.5}, false), std::invalid_argument);
  }
}

TEST_CASE("monte carlo noise curve for the sparse mixture") {
  // n = 1 pushforward is a two-component scale mixture; Romberg on the
  // defining integrals is the oracle.
  Eigen::MatrixXd row(1, 2);
  row << 1.3, -0.6;
  DesignMatrix X(row);
  PriorSpec prior = PriorSpec::sparse_mixture(2, 1, 0.5);
  ModelInstance model(X, prior, 0.5);

  // Component variances of the 1-D pushforward scale mixture.
  Eigen::VectorXd squares = row.cwiseAbs2().transpose();
  double a0 = prior.component_covariance_diagonal({0}).dot(squares);
  double a1 = prior.component_covariance_diagonal({1}).dot(squares);
  auto j_oracle = [&](double t) {
    double v0 = a0 + t, v1 = a1 + t;
    auto integrand = [&](double y) {
      double p0 = std::exp(-0.5 * y * y / v0) / std::sqrt(2.0 * M_PI * v0);
      double p1 = std::exp(-0.5 * y * y / v1) / std::sqrt(2.0 * M_PI * v1);
      double density = 0.5 * (p0 + p1);
      double slope = 0.5 * (-y / v0 * p0 - y / v1 * p1);
      return density > 0.0 ? slope * slope / density : 0.0;
    };
    double reach = 12.0 * std::sqrt(std::max(v0, v1));
    return romberg(integrand, -reach, 0.0, 1e-10) + romberg(integrand, 0.0, reach, 1e-10);
  };

  std::vector<double> grid = {0.1, 0.4, 1.6};
  NoiseCurve curve = noise_curve(model, grid, true, 20000, 123);
  CHECK(curve.provenance == CurveProvenance::MonteCarlo);
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    CHECK(p.train_se > 0.0);
    CHECK(p.jprime < 0.0);
    CHECK(std::abs(p.j - j_oracle(p.sigma2)) <= 4.0 * p.train_se / (p.sigma2 * p.sigma2));
    if (i > 0) {
      const auto& q = curve.points[i - 1];
      double se = 4.0 * std::hypot(p.train_se, q.train_se);
      CHECK(p.train >= q.train - se);
    }
  }

  // Hessian-route derivative vs a finite difference of the oracle curve.
  double t0 = 0.4, h = 1e-3;
  double fd = (j_oracle(t0 + h) - j_oracle(t0 - h)) / (2.0 * h);
  const auto& mid = curve.points[1];
  CHECK(std::abs(mid.jprime - fd) <= 4.0 * mid.jprime_se + 1e-4 * std::abs(fd));
}
