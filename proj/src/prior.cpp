#include "memlab/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "memlab/errors.hpp"
#include "memlab/rng.hpp"

namespace memlab {

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::IsotropicGaussian: return "IsotropicGaussian";
    case PriorKind::LowRankGaussian: return "LowRankGaussian";
    case PriorKind::SparseMixture: return "SparseMixture";
    case PriorKind::ScalarTwoPointMixture: return "ScalarTwoPointMixture";
  }
  return "?";
}

PriorKind prior_kind_from_string(const std::string& name) {
  if (name == "IsotropicGaussian") return PriorKind::IsotropicGaussian;
  if (name == "LowRankGaussian") return PriorKind::LowRankGaussian;
  if (name == "SparseMixture") return PriorKind::SparseMixture;
  if (name == "ScalarTwoPointMixture") return PriorKind::ScalarTwoPointMixture;
  throw ConfigError("unknown prior kind: " + name);
}

PriorSpec PriorSpec::isotropic(int d) {
  PriorSpec s;
  s.kind = PriorKind::IsotropicGaussian;
  s.d = d;
  s.validate();
  return s;
}

PriorSpec PriorSpec::low_rank(int d, int r, double eta) {
  PriorSpec s;
  s.kind = PriorKind::LowRankGaussian;
  s.d = d;
  s.r = r;
  s.eta = eta;
  s.validate();
  return s;
}

PriorSpec PriorSpec::sparse_mixture(int d, int K, double eta) {
  PriorSpec s;
  s.kind = PriorKind::SparseMixture;
  s.d = d;
  s.K = K;
  s.eta = eta;
  s.validate();
  return s;
}

PriorSpec PriorSpec::scalar_two_point(double eta) {
  PriorSpec s;
  s.kind = PriorKind::ScalarTwoPointMixture;
  s.d = 1;
  s.eta = eta;
  s.validate();
  return s;
}

void PriorSpec::validate() const {
  if (d < 1) throw std::invalid_argument("PriorSpec: d must be a positive integer");
  switch (kind) {
    case PriorKind::IsotropicGaussian:
      break;
    case PriorKind::LowRankGaussian:
      if (r < 1 || r > d) throw std::invalid_argument("PriorSpec: rank r must satisfy 1 <= r <= d");
      if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("PriorSpec: eta must lie in [0, 1] for LowRankGaussian");
      break;
    case PriorKind::SparseMixture:
      if (K < 1 || K > d) throw std::invalid_argument("PriorSpec: K must satisfy 1 <= K <= d");
      if (eta <= 0.0 || eta > 1.0)
        throw std::invalid_argument("PriorSpec: eta must lie in (0, 1] for SparseMixture");
      break;
    case PriorKind::ScalarTwoPointMixture:
      if (d != 1) throw std::invalid_argument("PriorSpec: scalar mixture requires d = 1");
      if (eta <= 0.0) throw std::invalid_argument("PriorSpec: eta must be positive");
      break;
  }
}

Eigen::VectorXd PriorSpec::covariance_diagonal() const {
  validate();
  Eigen::VectorXd diag;
  switch (kind) {
    case PriorKind::IsotropicGaussian:
      diag = Eigen::VectorXd::Constant(d, 1.0 / d);
      break;
    case PriorKind::LowRankGaussian:
      diag = Eigen::VectorXd::Constant(d, eta / d);
      diag.head(r).array() += (1.0 - eta) / r;
      break;
    case PriorKind::SparseMixture:
      // Averaging Omega_S over all supports gives I_d / d.
      diag = Eigen::VectorXd::Constant(d, 1.0 / d);
      break;
    case PriorKind::ScalarTwoPointMixture:
      diag = Eigen::VectorXd::Constant(1, 1.0 + eta);
      break;
  }
  return diag;
}

Eigen::VectorXd PriorSpec::component_covariance_diagonal(const std::vector<int>& support) const {
  if (kind != PriorKind::SparseMixture)
    throw UnsupportedPriorError("component covariance only defined for SparseMixture");
  if (static_cast<int>(support.size()) != K)
    throw std::invalid_argument("support size must equal K");
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(d, eta / d);
  for (int i : support) diag[i] += (1.0 - eta) / K;
  return diag;
}

std::int64_t PriorSpec::mixture_components() const {
  if (kind != PriorKind::SparseMixture) return 1;
  // binom(d, K) with early bail-out past the enumeration budget.
  long double value = 1.0L;
  for (int i = 1; i <= K; ++i) {
    value *= static_cast<long double>(d - K + i) / i;
    if (value > 4e18L) return std::numeric_limits<std::int64_t>::max();
  }
  return static_cast<std::int64_t>(std::llround(value));
}

std::map<std::string, std::string> PriorSpec::to_config() const {
  std::map<std::string, std::string> out;
  out["kind"] = to_string(kind);
  out["d"] = std::to_string(d);
  if (kind == PriorKind::LowRankGaussian) out["r"] = std::to_string(r);
  if (kind == PriorKind::SparseMixture) out["K"] = std::to_string(K);
  if (kind != PriorKind::IsotropicGaussian) {
    std::ostringstream os;
    os.precision(17);
    os << eta;
    out["eta"] = os.str();
  }
  return out;
}

PriorSpec PriorSpec::from_config(const std::map<std::string, std::string>& section) {
  auto get = [&](const std::string& key) -> std::string {
    auto it = section.find(key);
    if (it == section.end()) throw ConfigError("prior config: missing field '" + key + "'");
    return it->second;
  };
  PriorSpec s;
  s.kind = prior_kind_from_string(get("kind"));
  s.d = std::stoi(get("d"));
  if (s.kind == PriorKind::LowRankGaussian) s.r = std::stoi(get("r"));
  if (s.kind == PriorKind::SparseMixture) s.K = std::stoi(get("K"));
  if (s.kind != PriorKind::IsotropicGaussian) s.eta = std::stod(get("eta"));
  s.validate();
  return s;
}

std::string PriorSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(d=" << d;
  if (kind == PriorKind::LowRankGaussian) os << ",r=" << r << ",eta=" << eta;
  if (kind == PriorKind::SparseMixture) os << ",K=" << K << ",eta=" << eta;
  if (kind == PriorKind::ScalarTwoPointMixture) os << ",eta=" << eta;
  os << ")";
  return os.str();
}

Eigen::VectorXd sample_theta(const PriorSpec& prior, std::mt19937_64& rng) {
  prior.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(prior.d);
  switch (prior.kind) {
    case PriorKind::IsotropicGaussian: {
      double scale = 1.0 / std::sqrt(static_cast<double>(prior.d));
      for (int i = 0; i < prior.d; ++i) theta[i] = scale * normal(rng);
      break;
    }
    case PriorKind::LowRankGaussian: {
      Eigen::VectorXd diag = prior.covariance_diagonal();
      for (int i = 0; i < prior.d; ++i) theta[i] = std::sqrt(diag[i]) * normal(rng);
      break;
    }
    case PriorKind::SparseMixture: {
      // Uniform size-K support via partial Fisher-Yates, then the Gaussian component.
      std::vector<int> pool(prior.d);
      for (int i = 0; i < prior.d; ++i) pool[i] = i;
      std::vector<int> support(prior.K);
      for (int k = 0; k < prior.K; ++k) {
        std::uniform_int_distribution<int> pick(k, prior.d - 1);
        std::swap(pool[k], pool[pick(rng)]);
        support[k] = pool[k];
      }
      Eigen::VectorXd diag = prior.component_covariance_diagonal(support);
      for (int i = 0; i < prior.d; ++i) theta[i] = std::sqrt(diag[i]) * normal(rng);
      break;
    }
    case PriorKind::ScalarTwoPointMixture: {
      double center = (rng() & 1ULL) ? 1.0 : -1.0;
      theta[0] = center + std::sqrt(prior.eta) * normal(rng);
      break;
    }
  }
  return theta;
}

Eigen::VectorXd sample_theta(const PriorSpec& prior, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  return sample_theta(prior, rng);
}

}  // namespace memlab
