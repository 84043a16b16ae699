#include "memlab/design.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "memlab/errors.hpp"
#include "memlab/io.hpp"
#include "memlab/rng.hpp"

namespace memlab {

std::string to_string(EntryLaw law) {
  return law == EntryLaw::Gaussian ? "Gaussian" : "Rademacher";
}

EntryLaw entry_law_from_string(const std::string& name) {
  if (name == "Gaussian" || name == "gaussian") return EntryLaw::Gaussian;
  if (name == "Rademacher" || name == "rademacher") return EntryLaw::Rademacher;
  throw ConfigError("unknown entry law: " + name);
}

DesignMatrix::DesignMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  const int n = rows(), d = cols();
  if (n < 1 || d < n)
    throw std::invalid_argument("DesignMatrix: need d >= n >= 1, got n=" + std::to_string(n) +
                                ", d=" + std::to_string(d));
  Eigen::MatrixXd gram = entries_ * entries_.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("DesignMatrix: eigendecomposition failed");
  // Eigen sorts ascending; flip to descending.
  gram_eigenvalues_ = solver.eigenvalues().reverse();
  gram_basis_ = solver.eigenvectors().rowwise().reverse();

  double largest = std::sqrt(std::max(0.0, gram_eigenvalues_[0]));
  double smallest = std::sqrt(std::max(0.0, gram_eigenvalues_[n - 1]));
  if (!(smallest > 1e-10 * largest))
    throw RankDeficientError("DesignMatrix: smallest singular value " +
                             std::to_string(smallest) + " below 1e-10 of largest " +
                             std::to_string(largest));
}

double DesignMatrix::operator_norm() const {
  return std::sqrt(std::max(0.0, gram_eigenvalues_[0]));
}

double DesignMatrix::smallest_singular_value() const {
  return std::sqrt(std::max(0.0, gram_eigenvalues_[rows() - 1]));
}

std::string DesignMatrix::to_csv() const {
  std::ostringstream os;
  os << "n,d\n" << rows() << "," << cols() << "\n";
  for (int i = 0; i < rows(); ++i) {
    for (int j = 0; j < cols(); ++j) {
      if (j) os << ",";
      os << format_g17(entries_(i, j));
    }
    os << "\n";
  }
  return os.str();
}

DesignMatrix DesignMatrix::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "n,d")
    throw std::invalid_argument("DesignMatrix::from_csv: expected header 'n,d'");
  if (!std::getline(is, line)) throw std::invalid_argument("DesignMatrix::from_csv: missing sizes");
  int n = 0, d = 0;
  {
    std::istringstream ls(line);
    char comma = 0;
    if (!(ls >> n >> comma >> d) || comma != ',')
      throw std::invalid_argument("DesignMatrix::from_csv: bad size line");
  }
  Eigen::MatrixXd entries(n, d);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(is, line))
      throw std::invalid_argument("DesignMatrix::from_csv: missing row " + std::to_string(i));
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < d; ++j) {
      if (!std::getline(ls, cell, ','))
        throw std::invalid_argument("DesignMatrix::from_csv: short row " + std::to_string(i));
      entries(i, j) = std::stod(cell);
    }
  }
  return DesignMatrix(std::move(entries));
}

namespace {

Eigen::MatrixXd draw_entries(int n, int d, EntryLaw law, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  Eigen::MatrixXd X(n, d);
  if (law == EntryLaw::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) X(i, j) = normal(rng);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) X(i, j) = (rng() & 1ULL) ? 1.0 : -1.0;
  }
  return X;
}

}  // namespace

DesignMatrix make_design(int n, int d, EntryLaw law, std::uint64_t seed) {
  if (n < 1 || d < n)
    throw std::invalid_argument("make_design: need d >= n >= 1, got n=" + std::to_string(n) +
                                ", d=" + std::to_string(d));
  try {
    return DesignMatrix(draw_entries(n, d, law, seed));
  } catch (const RankDeficientError&) {
    return DesignMatrix(draw_entries(n, d, law, seed + 1));
  }
}

}  // namespace memlab
