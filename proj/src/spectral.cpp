#include "memlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "memlab/quadrature.hpp"

namespace memlab {

SpectralMeasure::SpectralMeasure(std::vector<SpectralAtom> atoms,
                                 std::optional<MarchenkoPasturPart> continuous)
    : atoms_(std::move(atoms)), continuous_(std::move(continuous)) {
  for (const auto& a : atoms_) {
    if (a.location < 0.0) throw std::invalid_argument("SpectralMeasure: negative atom location");
    if (a.weight <= 0.0) throw std::invalid_argument("SpectralMeasure: nonpositive atom weight");
  }
  double mass = total_mass();
  double tol = continuous_ ? 5e-12 : 1e-12;  // continuous mass known only to quadrature accuracy
  if (std::abs(mass - 1.0) > tol)
    throw std::invalid_argument("SpectralMeasure: total mass " + std::to_string(mass) +
                                " is not 1");
}

SpectralMeasure SpectralMeasure::from_eigenvalues(const Eigen::VectorXd& eigenvalues) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 1) throw std::invalid_argument("SpectralMeasure: empty eigenvalue list");
  std::vector<double> sorted(eigenvalues.data(), eigenvalues.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  std::vector<SpectralAtom> atoms;
  atoms.reserve(n);
  for (double v : sorted) atoms.push_back({std::max(v, 0.0), 1.0 / n});
  return SpectralMeasure(std::move(atoms), std::nullopt);
}

SpectralMeasure SpectralMeasure::marchenko_pastur(double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("marchenko_pastur: gamma must be positive");
  MarchenkoPasturPart mp;
  mp.gamma = gamma;
  double root = 1.0 / std::sqrt(gamma);
  mp.lambda_minus = (1.0 - root) * (1.0 - root);
  mp.lambda_plus = (1.0 + root) * (1.0 + root);
  mp.mass_at_zero = gamma < 1.0 ? 1.0 - gamma : 0.0;
  std::vector<SpectralAtom> atoms;
  return SpectralMeasure(std::move(atoms), mp);
}

namespace {

// Integrates f against the MP density via lambda = mid + half*cos(phi), which
// absorbs the square-root edge behaviour into sin^2(phi).
double integrate_mp(const MarchenkoPasturPart& mp, const std::function<double(double)>& f,
                    double rel_tol) {
  double mid = 0.5 * (mp.lambda_plus + mp.lambda_minus);
  double half = 0.5 * (mp.lambda_plus - mp.lambda_minus);
  auto g = [&](double phi) {
    double lambda = mid + half * std::cos(phi);
    double s = std::sin(phi);
    return f(lambda) * mp.gamma / (2.0 * M_PI * lambda) * half * half * s * s;
  };
  double scale = (std::abs(g(M_PI / 2)) + std::abs(g(M_PI / 3)) + std::abs(g(2 * M_PI / 3))) + 1e-8;
  double value = adaptive_simpson(g, 0.0, M_PI, rel_tol * scale * 0.1);
  if (mp.mass_at_zero > 0.0) value += mp.mass_at_zero * f(0.0);
  return value;
}

}  // namespace

double SpectralMeasure::total_mass() const {
  double mass = 0.0;
  for (const auto& a : atoms_) mass += a.weight;
  if (continuous_) mass += integrate_mp(*continuous_, [](double) { return 1.0; }, 1e-12);
  return mass;
}

double SpectralMeasure::integrate(const std::function<double(double)>& f, double rel_tol) const {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.weight * f(a.location);
  if (continuous_) acc += integrate_mp(*continuous_, f, rel_tol);
  return acc;
}

double SpectralMeasure::min_location() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& a : atoms_) lo = std::min(lo, a.location);
  if (continuous_) {
    lo = std::min(lo, continuous_->lambda_minus);
    if (continuous_->mass_at_zero > 0.0) lo = std::min(lo, 0.0);
  }
  return lo;
}

double SpectralMeasure::max_location() const {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& a : atoms_) hi = std::max(hi, a.location);
  if (continuous_) hi = std::max(hi, continuous_->lambda_plus);
  return hi;
}

}  // namespace memlab
