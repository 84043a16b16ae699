#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <utility>

#include "memlab/design.hpp"
#include "memlab/errors.hpp"
#include "memlab/prior.hpp"
#include "memlab/rng.hpp"
#include "memlab/spectral.hpp"

using namespace memlab;

TEST_CASE("prior spec validation") {
  CHECK_THROWS_AS(PriorSpec::isotropic(0), std::invalid_argument);
  CHECK_THROWS_AS(PriorSpec::low_rank(4, 5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(PriorSpec::low_rank(4, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(PriorSpec::low_rank(4, 2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(PriorSpec::sparse_mixture(4, 5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(PriorSpec::sparse_mixture(4, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PriorSpec::scalar_two_point(0.0), std::invalid_argument);
  CHECK_NOTHROW(PriorSpec::low_rank(4, 2, 0.0));  // exact low-rank limit
}

TEST_CASE("covariance diagonals have unit trace") {
  CHECK(PriorSpec::isotropic(7).covariance_diagonal().sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(PriorSpec::low_rank(6, 2, 0.3).covariance_diagonal().sum() ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(PriorSpec::sparse_mixture(6, 2, 0.1).covariance_diagonal().sum() ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sparse mixture average covariance equals the enumeration oracle") {
  // Oracle: average Omega_S over all binom(6,2)=15 supports directly.
  PriorSpec prior = PriorSpec::sparse_mixture(6, 2, 0.1);
  Eigen::VectorXd average = Eigen::VectorXd::Zero(6);
  int count = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      average += prior.component_covariance_diagonal({i, j});
      ++count;
    }
  }
  average /= count;
  CHECK(count == 15);
  for (int i = 0; i < 6; ++i) CHECK(average[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("make_design preconditions and determinism") {
  CHECK_THROWS_AS(make_design(3, 2, EntryLaw::Gaussian, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_design(0, 2, EntryLaw::Gaussian, 1), std::invalid_argument);

  DesignMatrix a = make_design(1, 1, EntryLaw::Gaussian, 0);
  CHECK(a.entries()(0, 0) != 0.0);

  DesignMatrix b = make_design(5, 9, EntryLaw::Gaussian, 42);
  DesignMatrix c = make_design(5, 9, EntryLaw::Gaussian, 42);
  CHECK((b.entries() - c.entries()).norm() == 0.0);
  CHECK((b.entries() - make_design(5, 9, EntryLaw::Gaussian, 43).entries()).norm() > 0.0);
}

TEST_CASE("rademacher entries are signs with near-zero mean") {
  DesignMatrix X = make_design(20, 50, EntryLaw::Rademacher, 9);
  double mean = X.entries().mean();
  CHECK(X.entries().cwiseAbs().minCoeff() == 1.0);
  CHECK(X.entries().cwiseAbs().maxCoeff() == 1.0);
  CHECK(std::abs(mean) < 0.1);
}

TEST_CASE("extreme eigenvalues approach the Bai-Yin limits") {
  DesignMatrix X = make_design(200, 800, EntryLaw::Gaussian, 7);
  Eigen::VectorXd evals = X.gram_eigenvalues() / 800.0;  // spectrum of XX'/d
  CHECK(evals[0] == doctest::Approx(2.25).epsilon(0.10));
  CHECK(evals[199] == doctest::Approx(0.25).epsilon(0.10));
}

TEST_CASE("rank-deficiency is reported after one resample") {
  // An explicitly singular matrix is rejected outright.
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(DesignMatrix{singular}, RankDeficientError);

  // 2x2 sign matrices are singular half the time, so across many seeds the
  // resample-once-then-fail contract shows both outcomes.
  int ok = 0, failed = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    try {
      DesignMatrix X = make_design(2, 2, EntryLaw::Rademacher, seed);
      CHECK(X.smallest_singular_value() > 1e-10 * X.operator_norm());
      ++ok;
    } catch (const RankDeficientError&) {
      ++failed;
    }
  }
  CHECK(ok > 0);
  CHECK(failed > 0);
}

namespace {

Eigen::MatrixXd empirical_covariance(const PriorSpec& prior, int draws, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(prior.d, prior.d);
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXd theta = sample_theta(prior, rng);
    acc.noalias() += theta * theta.transpose();
  }
  return acc / draws;
}

}  // namespace

TEST_CASE("sampler moments match the covariance") {
  const int draws = 100000;

  SUBCASE("isotropic second moment") {
    PriorSpec prior = PriorSpec::isotropic(4);
    std::mt19937_64 rng = make_rng(11);
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) acc += sample_theta(prior, rng).squaredNorm();
    CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("low-rank covariance entrywise") {
    PriorSpec prior = PriorSpec::low_rank(4, 2, 0.5);
    Eigen::MatrixXd cov = empirical_covariance(prior, draws, 12);
    Eigen::MatrixXd omega = prior.covariance_diagonal().asDiagonal();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(cov(i, j) - omega(i, j)) < 0.02);
  }

  SUBCASE("sparse mixture marginal variances") {
    PriorSpec prior = PriorSpec::sparse_mixture(6, 2, 0.1);
    Eigen::MatrixXd cov = empirical_covariance(prior, draws, 13);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(cov(i, i) - 1.0 / 6.0) < 0.01);
  }

  SUBCASE("scalar two-point second moment is 1 + eta") {
    PriorSpec prior = PriorSpec::scalar_two_point(0.25);
    std::mt19937_64 rng = make_rng(14);
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
      double v = sample_theta(prior, rng)[0];
      acc += v * v;
    }
    CHECK(acc / draws == doctest::Approx(1.25).epsilon(0.02));
  }
}

TEST_CASE("sampler covariance in operator norm") {
  const int draws = 100000;
  for (const PriorSpec& prior :
       {PriorSpec::isotropic(4), PriorSpec::low_rank(4, 2, 0.5),
        PriorSpec::sparse_mixture(4, 1, 0.3)}) {
    Eigen::MatrixXd cov = empirical_covariance(prior, draws, 21);
    Eigen::MatrixXd omega = prior.covariance_diagonal().asDiagonal();
    Eigen::MatrixXd diff = cov - omega;
    double gap = diff.selfadjointView<Eigen::Lower>().operatorNorm();
    CHECK(gap <= 5.0 * std::sqrt(prior.d / static_cast<double>(draws)));
  }
}

TEST_CASE("sparse support sets are uniform over subsets") {
  PriorSpec prior = PriorSpec::sparse_mixture(5, 2, 0.5);
  std::mt19937_64 rng = make_rng(31);
  // Support is identifiable from the coordinate magnitudes only in law, so
  // count hits of the large-variance pattern through many draws.
  std::map<std::pair<int, int>, int> hits;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    Eigen::VectorXd theta = sample_theta(prior, rng);
    // Spiked coordinates carry variance 0.35 vs 0.1 for the rest; tag the two
    // largest magnitudes. This is a statistical check, not an exact one.
    int a = 0, b = 1;
    if (std::abs(theta[b]) > std::abs(theta[a])) std::swap(a, b);
    for (int k = 2; k < 5; ++k) {
      if (std::abs(theta[k]) > std::abs(theta[a])) {
        b = a;
        a = k;
      } else if (std::abs(theta[k]) > std::abs(theta[b])) {
        b = k;
      }
    }
    hits[{std::min(a, b), std::max(a, b)}]++;
  }
  CHECK(hits.size() == 10);  // all binom(5,2) patterns appear
  for (const auto& [key, count] : hits) CHECK(count > draws / 40);
}

TEST_CASE("prior spec config round trip") {
  PriorSpec original = PriorSpec::sparse_mixture(12, 3, 0.125);
  PriorSpec back = PriorSpec::from_config(original.to_config());
  CHECK(back.kind == original.kind);
  CHECK(back.d == original.d);
  CHECK(back.K == original.K);
  CHECK(back.eta == original.eta);

  auto section = PriorSpec::low_rank(8, 2, 0.25).to_config();
  section.erase("r");
  CHECK_THROWS_AS(PriorSpec::from_config(section), ConfigError);
}

TEST_CASE("design matrix csv round trip") {
  DesignMatrix X = make_design(3, 5, EntryLaw::Gaussian, 77);
  DesignMatrix back = DesignMatrix::from_csv(X.to_csv());
  CHECK((back.entries() - X.entries()).norm() == 0.0);
  CHECK_THROWS(DesignMatrix::from_csv("bogus\n1,2\n"));
}

TEST_CASE("spectral measure bookkeeping") {
  Eigen::VectorXd evals(3);
  evals << 2.0, 0.5, 1.0;
  SpectralMeasure mu = SpectralMeasure::from_eigenvalues(evals);
  CHECK(mu.atoms()[0].location == 2.0);  // sorted descending
  CHECK(mu.atoms()[2].location == 0.5);
  CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mu.integrate([](double v) { return v; }) == doctest::Approx(3.5 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(SpectralMeasure({{1.0, 0.4}, {2.0, 0.4}}, std::nullopt), std::invalid_argument);
  CHECK_THROWS_AS(SpectralMeasure({{-1.0, 1.0}}, std::nullopt), std::invalid_argument);
}

TEST_CASE("marchenko-pastur measure integrates to known moments") {
  SpectralMeasure mp = SpectralMeasure::marchenko_pastur(4.0);
  CHECK(mp.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mp.integrate([](double v) { return v; }, 1e-10) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(mp.integrate([](double v) { return 1.0 / v; }, 1e-10) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-8));
}
