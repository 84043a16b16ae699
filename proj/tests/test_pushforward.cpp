#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "memlab/errors.hpp"
#include "memlab/pushforward.hpp"
#include "memlab/rng.hpp"
#include "oracles.hpp"

using namespace memlab;

namespace {

Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = normal(rng);
  return y;
}

}  // namespace

TEST_CASE("gaussian pushforward factorization quality") {
  DesignMatrix X = make_design(6, 14, EntryLaw::Gaussian, 5);
  GaussianPushforward push(X, PriorSpec::low_rank(14, 4, 0.3).covariance_diagonal());
  CHECK(push.reconstruction_error() <= 1e-10);
  for (int i = 1; i < push.n(); ++i) CHECK(push.eigenvalues()[i] <= push.eigenvalues()[i - 1]);
  CHECK(push.eigenvalues().minCoeff() >= 0.0);
  CHECK(push.spectrum().total_mass() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("centered gaussian score vanishes at zero") {
  DesignMatrix X = make_design(4, 9, EntryLaw::Gaussian, 6);
  GaussianPushforward push(X, PriorSpec::isotropic(9).covariance_diagonal());
  CHECK(push.score(Eigen::VectorXd::Zero(4)).norm() == 0.0);
}

TEST_CASE("scalar standard normal density and score") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  DesignMatrix X(one);
  Eigen::VectorXd y(1);
  y << 2.0;
  auto [log_p, score] = pushforward_logdensity_and_score(X, PriorSpec::isotropic(1), y);
  CHECK(log_p == doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 2.0).epsilon(1e-14));
  CHECK(score[0] == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("sparse mixture density matches the direct-summation oracle") {
  DesignMatrix X = make_design(3, 4, EntryLaw::Gaussian, 8);
  PriorSpec prior = PriorSpec::sparse_mixture(4, 1, 0.5);
  oracle::DenseMixture dense = oracle::dense_mixture(X, prior);
  MixturePushforward mix(X, prior);
  CHECK(mix.components() == 4);

  for (std::uint64_t s = 0; s < 5; ++s) {
    Eigen::VectorXd y = random_vector(3, 100 + s);
    auto eval = mix.evaluate(y, 0.0);
    double oracle_density = oracle::dense_mixture_density(dense, y, 0.0);
    CHECK(eval.log_density == doctest::Approx(std::log(oracle_density)).epsilon(1e-11));
    Eigen::VectorXd oracle_score = oracle::dense_mixture_score(dense, y, 0.0);
    CHECK((eval.score - oracle_score).norm() <= 1e-10 * (1.0 + oracle_score.norm()));
    CHECK(eval.responsibilities.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eval.responsibilities.minCoeff() >= 0.0);
  }
}

TEST_CASE("woodbury path agrees with dense linear algebra at K = 2") {
  DesignMatrix X = make_design(6, 12, EntryLaw::Gaussian, 9);
  PriorSpec prior = PriorSpec::sparse_mixture(12, 2, 0.2);
  oracle::DenseMixture dense = oracle::dense_mixture(X, prior);
  MixturePushforward mix(X, prior);
  CHECK(mix.components() == 66);

  for (double t : {0.0, 0.3}) {
    auto ctx = mix.context(t);
    for (std::uint64_t s = 0; s < 4; ++s) {
      Eigen::VectorXd y = random_vector(6, 200 + s);
      auto eval = mix.evaluate(y, *ctx);
      CHECK(eval.log_density ==
            doctest::Approx(std::log(oracle::dense_mixture_density(dense, y, t))).epsilon(1e-10));
      Eigen::VectorXd oracle_score = oracle::dense_mixture_score(dense, y, t);
      CHECK((eval.score - oracle_score).norm() <= 1e-9 * (1.0 + oracle_score.norm()));

      Eigen::MatrixXd hess = mix.log_density_hessian(y, *ctx);
      Eigen::MatrixXd oracle_hess = oracle::dense_mixture_hessian(dense, y, t);
      CHECK((hess - oracle_hess).norm() <= 1e-9 * (1.0 + oracle_hess.norm()));
    }
  }
}

TEST_CASE("score agrees with finite differences of the log-density") {
  // 100 random observation points per prior family.
  SUBCASE("single gaussian families") {
    for (const PriorSpec& prior : {PriorSpec::isotropic(7), PriorSpec::low_rank(7, 3, 0.4)}) {
      DesignMatrix X = make_design(4, 7, EntryLaw::Gaussian, 15);
      GaussianPushforward push(X, prior.covariance_diagonal());
      for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd y = random_vector(4, 300 + k);
        double h = 1e-5 * (1.0 + y.norm());
        Eigen::VectorXd fd = oracle::finite_difference_score(
            [&](const Eigen::VectorXd& point) { return push.log_density(point); }, y, h);
        Eigen::VectorXd score = push.score(y);
        CHECK((fd - score).norm() <= 1e-5 * (1.0 + score.norm()));
      }
    }
  }

  SUBCASE("sparse mixture") {
    DesignMatrix X = make_design(3, 6, EntryLaw::Gaussian, 16);
    PriorSpec prior = PriorSpec::sparse_mixture(6, 2, 0.3);
    MixturePushforward mix(X, prior);
    auto ctx = mix.context(0.0);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd y = random_vector(3, 400 + k);
      double h = 1e-5 * (1.0 + y.norm());
      Eigen::VectorXd fd = oracle::finite_difference_score(
          [&](const Eigen::VectorXd& point) { return mix.evaluate(point, *ctx).log_density; }, y,
          h);
      Eigen::VectorXd score = mix.evaluate(y, *ctx).score;
      CHECK((fd - score).norm() <= 1e-5 * (1.0 + score.norm()));
    }
  }

  SUBCASE("scalar two-point mixture") {
    Eigen::MatrixXd entry(1, 1);
    entry << -1.3;
    DesignMatrix X(entry);
    PriorSpec prior = PriorSpec::scalar_two_point(0.2);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd y = random_vector(1, 500 + k);
      double h = 1e-5 * (1.0 + y.norm());
      auto [log_p, score] = pushforward_logdensity_and_score(X, prior, y);
      Eigen::VectorXd fd = oracle::finite_difference_score(
          [&](const Eigen::VectorXd& point) {
            return pushforward_logdensity_and_score(X, prior, point).first;
          },
          y, h);
      CHECK((fd - score).norm() <= 1e-5 * (1.0 + score.norm()));
      CHECK(std::isfinite(log_p));
    }
  }
}

TEST_CASE("rank perturbation at eta = 1 collapses to the isotropic prior") {
  DesignMatrix X = make_design(5, 11, EntryLaw::Gaussian, 17);
  GaussianPushforward low(X, PriorSpec::low_rank(11, 3, 1.0).covariance_diagonal());
  GaussianPushforward iso(X, PriorSpec::isotropic(11).covariance_diagonal());
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd y = random_vector(5, 600 + k);
    CHECK(low.log_density(y) == doctest::Approx(iso.log_density(y)).epsilon(1e-10));
  }
}

TEST_CASE("component budget and singular covariances are rejected") {
  // binom(60, 10) is far beyond the enumeration budget.
  CHECK(PriorSpec::sparse_mixture(60, 10, 0.5).mixture_components() > 1000000);
  DesignMatrix X = make_design(4, 60, EntryLaw::Gaussian, 18);
  CHECK_THROWS_AS(MixturePushforward(X, PriorSpec::sparse_mixture(60, 10, 0.5)),
                  TooManyComponentsError);

  // A vanishing perturbation mass drives the component condition numbers
  // past the guard.
  DesignMatrix small = make_design(3, 6, EntryLaw::Gaussian, 19);
  MixturePushforward mix(small, PriorSpec::sparse_mixture(6, 1, 1e-20));
  CHECK_THROWS_AS(mix.context(0.0), SingularCovarianceError);

  // The exact low-rank prior has no density when r < n.
  DesignMatrix tall = make_design(4, 8, EntryLaw::Gaussian, 20);
  GaussianPushforward degenerate(tall, PriorSpec::low_rank(8, 2, 0.0).covariance_diagonal());
  CHECK_THROWS_AS(degenerate.log_density(Eigen::VectorXd::Zero(4)), SingularCovarianceError);
}

TEST_CASE("scalar two-point pushforward requires a 1x1 design") {
  DesignMatrix X = make_design(2, 3, EntryLaw::Gaussian, 21);
  CHECK_THROWS_AS(
      pushforward_logdensity_and_score(X, PriorSpec::scalar_two_point(0.1),
                                       Eigen::VectorXd::Zero(2)),
      UnsupportedPriorError);
}
