#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

namespace memlab {

struct SpectralAtom {
  double location = 0.0;  // >= 0
  double weight = 0.0;    // > 0
};

// Marchenko-Pastur component of a spectral measure: density
//   gamma / (2 pi lambda) * sqrt((lambda_plus - lambda)(lambda - lambda_minus))
// on [lambda_minus, lambda_plus], plus a point mass at zero when gamma < 1.
struct MarchenkoPasturPart {
  double gamma = 0.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double mass_at_zero = 0.0;
};

class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  SpectralMeasure(std::vector<SpectralAtom> atoms, std::optional<MarchenkoPasturPart> continuous);

  // Equal-weight atoms from an eigenvalue list; sorted descending.
  static SpectralMeasure from_eigenvalues(const Eigen::VectorXd& eigenvalues);
  static SpectralMeasure marchenko_pastur(double gamma);

  const std::vector<SpectralAtom>& atoms() const { return atoms_; }
  const std::optional<MarchenkoPasturPart>& continuous() const { return continuous_; }

  double total_mass() const;

  // Exact sum over atoms plus adaptive quadrature of the continuous part.
  double integrate(const std::function<double(double)>& f, double rel_tol = 1e-8) const;

  double min_location() const;
  double max_location() const;

 private:
  std::vector<SpectralAtom> atoms_;
  std::optional<MarchenkoPasturPart> continuous_;
};

}  // namespace memlab
