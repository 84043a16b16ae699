#include "memlab/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "memlab/errors.hpp"
#include "memlab/io.hpp"

namespace memlab {

void PopulationSpectrum::validate() const {
  if (atoms.empty()) throw std::invalid_argument("PopulationSpectrum: no atoms");
  double mass = 0.0;
  for (const auto& a : atoms) {
    if (a.location < 0.0)
      throw std::invalid_argument("PopulationSpectrum: negative atom location");
    if (a.weight <= 0.0) throw std::invalid_argument("PopulationSpectrum: nonpositive mass");
    mass += a.weight;
  }
  if (std::abs(mass - 1.0) > 1e-12)
    throw std::invalid_argument("PopulationSpectrum: total mass is not 1");
}

double PopulationSpectrum::moment(int power) const {
  double acc = 0.0;
  for (const auto& a : atoms) acc += a.weight * std::pow(a.location, power);
  return acc;
}

PopulationSpectrum PopulationSpectrum::point_mass(double location) {
  PopulationSpectrum nu;
  nu.atoms.push_back({location, 1.0});
  nu.validate();
  return nu;
}

PopulationSpectrum PopulationSpectrum::low_rank(double gamma, double rho, double eta) {
  if (!(gamma > 1.0)) throw std::invalid_argument("low_rank spectrum: gamma must exceed 1");
  if (!(rho > 0.0 && rho <= gamma))
    throw std::invalid_argument("low_rank spectrum: rho must lie in (0, gamma]");
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("low_rank spectrum: eta must lie in (0, 1]");
  PopulationSpectrum nu;
  double top = gamma * (1.0 - eta) / rho + eta;
  double top_mass = rho / gamma;
  if (top_mass >= 1.0 || std::abs(top - eta) < 1e-15) {
    nu.atoms.push_back({eta == 1.0 ? 1.0 : top, 1.0});
  } else {
    nu.atoms.push_back({top, top_mass});
    nu.atoms.push_back({eta, 1.0 - top_mass});
  }
  nu.validate();
  return nu;
}

PopulationSpectrum PopulationSpectrum::from_string(const std::string& text) {
  PopulationSpectrum nu;
  std::istringstream stream(text);
  std::string pair;
  while (std::getline(stream, pair, ',')) {
    std::size_t colon = pair.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("PopulationSpectrum: expected location:mass pairs");
    try {
      nu.atoms.push_back({std::stod(pair.substr(0, colon)), std::stod(pair.substr(colon + 1))});
    } catch (const std::exception&) {
      throw std::invalid_argument("PopulationSpectrum: bad pair '" + pair + "'");
    }
  }
  nu.validate();
  return nu;
}

std::string PopulationSpectrum::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) os << ",";
    os << format_g17(atoms[i].location) << ":" << format_g17(atoms[i].weight);
  }
  return os.str();
}

MpFunctionals mp_functionals(double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("mp_functionals: gamma must exceed 1");
  MpFunctionals out;
  out.mean = 1.0;
  out.inv_mean = gamma / (gamma - 1.0);
  double root = 1.0 / std::sqrt(gamma);
  out.lambda_plus = (1.0 + root) * (1.0 + root);
  out.lambda_minus = (1.0 - root) * (1.0 - root);
  return out;
}

namespace {

double nu_integral(const PopulationSpectrum& nu, double gamma, double m) {
  double acc = 0.0;
  for (const auto& a : nu.atoms) acc += a.weight * a.location / (1.0 + a.location * m / gamma);
  return acc;
}

StieltjesSolution iterate_from(const PopulationSpectrum& nu, double gamma, double z, double m0,
                               int max_iterations) {
  StieltjesSolution sol;
  sol.z = z;
  double m = m0;
  double best_m = m0;
  double best_residual = std::numeric_limits<double>::infinity();
  const double damping = 0.5;
  int iterations = 0;
  for (; iterations < max_iterations; ++iterations) {
    double rhs = -1.0 / (z - nu_integral(nu, gamma, m));
    double residual = std::abs(m - rhs);
    if (residual < best_residual) {
      best_residual = residual;
      best_m = m;
    }
    if (residual <= 1e-12) break;
    m = (1.0 - damping) * m + damping * rhs;
  }
  sol.m = best_m;
  sol.residual = std::abs(best_m + 1.0 / (z - nu_integral(nu, gamma, best_m)));
  sol.iterations = iterations;
  sol.converged = sol.residual <= 1e-10;
  return sol;
}

}  // namespace

StieltjesSolution solve_stieltjes(const PopulationSpectrum& nu, double gamma, double z) {
  nu.validate();
  if (!(gamma > 1.0)) throw std::invalid_argument("solve_stieltjes: gamma must exceed 1");
  if (z > 0.0) throw std::invalid_argument("solve_stieltjes: z must be <= 0");
  if (z == 0.0) {
    // Needs a spectral gap above zero; the edge scan certifies it.
    SpectralEdges edges = spectral_edges(nu, gamma);
    if (!(edges.lambda_minus > 0.0))
      throw std::invalid_argument("solve_stieltjes: support touches zero at z = 0");
  }
  double mean = nu.moment(1);
  double m0 = -1.0 / (z - mean);
  const int max_iterations = 10000;
  StieltjesSolution first = iterate_from(nu, gamma, z, m0, max_iterations);
  StieltjesSolution second = iterate_from(nu, gamma, z, 10.0 * m0 + 1.0, max_iterations);
  if (first.converged && second.converged && std::abs(first.m - second.m) > 1e-6)
    throw BranchAmbiguityError("solve_stieltjes: two starts disagree by more than 1e-6");
  return first.residual <= second.residual ? first : second;
}

LowRankLimit lowrank_limit_params(double gamma, double rho, double eta) {
  if (!(gamma > 1.0)) throw std::invalid_argument("lowrank_limit_params: gamma must exceed 1");
  if (!(rho > 0.0 && rho <= gamma))
    throw std::invalid_argument("lowrank_limit_params: rho must lie in (0, gamma] (rank at most d)");
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("lowrank_limit_params: eta must lie in (0, 1]");
  LowRankLimit out;
  out.v_limit = 1.0;
  double sg = std::sqrt(gamma);
  out.lambda_limit = (1.0 + sg) * (1.0 + sg);

  // Resolvent limit at z = 0: positive root of A m^2 + B m - gamma^2 rho = 0,
  // the quadratic induced by the two-atom population spectrum.
  double a = (gamma - 1.0) * eta * (gamma * (1.0 - eta) + eta * rho);
  double b = gamma * (gamma * (rho - 1.0) + eta * (gamma - 2.0 * rho));
  double c = -gamma * gamma * rho;
  out.j_limit = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);

  if (rho < 1.0) {
    out.regime = "underparameterized";
    out.eta_zero_leading = gamma * (1.0 - rho) / (eta * (gamma - 1.0));
  } else if (rho == 1.0) {
    out.regime = "interpolation-threshold";
    out.eta_zero_leading = std::sqrt(gamma / (eta * (gamma - 1.0)));
  } else {
    out.regime = "overparameterized";
    out.eta_zero_leading = rho / (rho - 1.0);
  }
  return out;
}

LowRankTrainLimit exact_lowrank_train_limit(double rho, double sigma2) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("exact_lowrank_train_limit: rho must lie in (0, 1)");
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("exact_lowrank_train_limit: sigma2 must be positive");
  // Positive root of sigma^2 m^2 + (sigma^2 rho + rho - 1) m - rho = 0.
  double b = sigma2 * rho + rho - 1.0;
  double m = (-b + std::sqrt(b * b + 4.0 * sigma2 * rho)) / (2.0 * sigma2);
  LowRankTrainLimit out;
  out.value = sigma2 * sigma2 * m;
  out.expansion = sigma2 * (1.0 - rho) + sigma2 * sigma2 * rho * rho / (1.0 - rho);
  return out;
}

FisherBounds sparse_fisher_bounds(double gamma, double eta) {
  if (!(gamma > 1.0)) throw std::invalid_argument("sparse_fisher_bounds: gamma must exceed 1");
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("sparse_fisher_bounds: eta must lie in (0, 1]");
  FisherBounds out;
  out.lower = std::exp(1.0 + (gamma - 1.0) * std::log1p(-1.0 / gamma)) / eta;
  out.upper = gamma / (eta * (gamma - 1.0));
  return out;
}

namespace {

// Inverse map z(m) = -1/m + int lambda/(1 + lambda m / gamma) dnu; support
// edges are its critical values. The upper edge comes from m < 0, and for
// gamma > 1 the lower edge comes from m > 0.
double edge_map(const PopulationSpectrum& nu, double gamma, double m) {
  double acc = 0.0;
  for (const auto& a : nu.atoms) acc += a.weight * a.location / (1.0 + a.location * m / gamma);
  return -1.0 / m + acc;
}

double edge_defect(const PopulationSpectrum& nu, double gamma, double m) {
  double acc = 0.0;
  for (const auto& a : nu.atoms) {
    double denom = 1.0 + a.location * m / gamma;
    acc += a.weight * a.location * a.location / (denom * denom);
  }
  return 1.0 / (m * m) - acc / gamma;
}

}  // namespace

SpectralEdges spectral_edges(const PopulationSpectrum& nu, double gamma) {
  nu.validate();
  if (!(gamma > 1.0)) throw std::invalid_argument("spectral_edges: gamma must exceed 1");

  // Negative axis split at the poles m = -gamma/lambda_i, plus the whole
  // positive axis (pole-free).
  std::vector<double> poles;
  for (const auto& a : nu.atoms)
    if (a.location > 0.0) poles.push_back(-gamma / a.location);
  std::sort(poles.begin(), poles.end());  // ascending (most negative first)

  const double m_extent = 1e6, m_margin = 1e-6;
  std::vector<std::pair<double, double>> segments;
  double left = -m_extent;
  for (double pole : poles) {
    if (pole <= -m_extent || pole >= -m_margin) continue;
    double margin = std::max(1e-12, 1e-9 * std::abs(pole));
    segments.push_back({left, pole - margin});
    left = pole + margin;
  }
  segments.push_back({left, -m_margin});
  segments.push_back({m_margin, m_extent});

  std::vector<double> roots;
  const int scan_points = 2000;
  for (auto [a, b] : segments) {
    if (!(b > a)) continue;
    // Geometric scan in |m| within each segment.
    double sign = a > 0.0 ? 1.0 : -1.0;
    double la = std::log(std::min(std::abs(a), std::abs(b)));
    double lb = std::log(std::max(std::abs(a), std::abs(b)));
    auto point = [&](int i) {
      double mag = std::exp(la + (lb - la) * static_cast<double>(i) / scan_points);
      return sign * mag;
    };
    double prev_m = point(sign > 0.0 ? 0 : scan_points);
    double prev_f = edge_defect(nu, gamma, prev_m);
    for (int step = 1; step <= scan_points; ++step) {
      int i = sign > 0.0 ? step : scan_points - step;
      double cur_m = point(i);
      double cur_f = edge_defect(nu, gamma, cur_m);
      if (std::isfinite(prev_f) && std::isfinite(cur_f) && prev_f * cur_f < 0.0) {
        double lo = std::min(prev_m, cur_m), hi = std::max(prev_m, cur_m);
        double flo = edge_defect(nu, gamma, lo);
        for (int iter = 0; iter < 200; ++iter) {
          double mid = 0.5 * (lo + hi);
          double fmid = edge_defect(nu, gamma, mid);
          if (flo * fmid <= 0.0) {
            hi = mid;
          } else {
            lo = mid;
            flo = fmid;
          }
          if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid))) break;
        }
        roots.push_back(0.5 * (lo + hi));
      }
      prev_m = cur_m;
      prev_f = cur_f;
    }
  }

  if (roots.empty())
    throw NoEdgeFoundError("spectral_edges: no sign change of the edge equation in the scan range");

  std::vector<std::pair<double, double>> located;  // (lambda, m)
  for (double m : roots) {
    double lambda = edge_map(nu, gamma, m);
    if (std::isfinite(lambda) && lambda >= 0.0) located.push_back({lambda, m});
  }
  if (located.empty())
    throw NoEdgeFoundError("spectral_edges: critical points map outside the spectrum axis");
  std::sort(located.begin(), located.end());
  // Merge near-duplicate roots found from adjacent scan cells.
  std::vector<std::pair<double, double>> unique_located;
  for (const auto& lm : located) {
    if (!unique_located.empty() &&
        std::abs(lm.first - unique_located.back().first) <=
            1e-8 * std::max(1.0, std::abs(lm.first))) {
      continue;
    }
    unique_located.push_back(lm);
  }

  SpectralEdges out;
  out.lambda_minus = unique_located.front().first;
  out.lambda_plus = unique_located.back().first;
  for (std::size_t i = 0; i < unique_located.size(); ++i) {
    out.roots_m.push_back(unique_located[i].second);
    if (i > 0 && i + 1 < unique_located.size()) out.interior.push_back(unique_located[i].first);
  }
  return out;
}

std::string stieltjes_trace_csv(const std::vector<StieltjesSolution>& solutions) {
  std::ostringstream os;
  os << "z,m,iterations,residual,converged\n";
  for (const auto& sol : solutions) {
    os << format_g17(sol.z) << "," << format_g17(sol.m) << "," << sol.iterations << ","
       << format_g17(sol.residual) << "," << (sol.converged ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string edges_csv(const SpectralEdges& edges) {
  std::ostringstream os;
  os << "kind,lambda,m\n";
  os << "lower," << format_g17(edges.lambda_minus) << "," << format_g17(edges.roots_m.front())
     << "\n";
  for (std::size_t i = 0; i < edges.interior.size(); ++i)
    os << "interior," << format_g17(edges.interior[i]) << ","
       << format_g17(edges.roots_m[i + 1]) << "\n";
  os << "upper," << format_g17(edges.lambda_plus) << "," << format_g17(edges.roots_m.back())
     << "\n";
  return os.str();
}

}  // namespace memlab
