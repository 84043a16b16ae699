#include "memlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <ostream>
#include <random>
#include <sstream>

#include "memlab/bayes.hpp"
#include "memlab/errors.hpp"
#include "memlab/rmt.hpp"
#include "memlab/rng.hpp"
#include "memlab/scalar_lab.hpp"

namespace memlab {

namespace {

using nlohmann::ordered_json;

struct ExperimentRun {
  explicit ExperimentRun(const ExperimentConfig& config) : config(config) {
    manifest.experiment = config.experiment;
    dir = std::filesystem::path(config.output_dir) / config.experiment;
    std::filesystem::create_directories(dir);
  }

  void check(const std::string& name, bool pass, const std::string& detail) {
    manifest.checks.push_back({name, pass, detail});
    if (!pass) ++manifest.failures;
  }

  void note_seed(const std::string& purpose, std::uint64_t seed, std::int64_t replicates = 0) {
    manifest.seed_ledger.push_back({purpose, seed, replicates});
  }

  void write_output(const std::string& filename, const std::string& content) {
    std::filesystem::path path = dir / filename;
    write_file(path.string(), content);
    manifest.outputs.push_back(path.string());
  }

  const ExperimentConfig& config;
  std::filesystem::path dir;
  RunManifest manifest;
};

std::string rel_detail(const std::string& what, double got, double want, double tol) {
  std::ostringstream os;
  os.precision(6);
  os << what << "=" << got << " target=" << want
     << " rel_err=" << std::abs(got - want) / std::max(std::abs(want), 1e-300) << " tol=" << tol;
  return os.str();
}

bool within_rel(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

std::vector<double> grid_from(const ConfigSection& s, const std::string& key,
                              const std::vector<double>& fallback) {
  if (!s.has(key)) return fallback;
  std::vector<double> grid = s.get_list(key);
  std::sort(grid.begin(), grid.end());
  return grid;
}

void audit_exact_curve(ExperimentRun& run, const std::string& tag, const NoiseCurve& curve) {
  int sandwich_violations = 0;
  int monotonic_violations = 0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    double slack = 1e-10 * std::max(1.0, std::abs(p.train));
    if (p.train < p.lower_bound - slack || p.train > p.upper_bound + slack) ++sandwich_violations;
    if (i > 0) {
      const auto& q = curve.points[i - 1];
      if (p.train < q.train * (1.0 - 1e-12)) ++monotonic_violations;
      if (p.j > q.j * (1.0 + 1e-12)) ++monotonic_violations;
    }
  }
  run.check(tag + ".sandwich", sandwich_violations == 0,
            std::to_string(sandwich_violations) + " violations (tolerance 1e-10 relative)");
  run.check(tag + ".monotonic", monotonic_violations == 0,
            std::to_string(monotonic_violations) + " violations");
}

void run_isotropic(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  int n = static_cast<int>(s.get_int("n"));
  int d = static_cast<int>(s.get_int("d"));
  int seeds = static_cast<int>(s.get_int_or("seeds", 5));
  std::uint64_t seed = s.get_seed_or("seed", 1);
  double tol = s.get_double_or("tol_limits", 0.05);
  double sigma2 = s.get_double_or("sigma2", 1.0);
  std::vector<double> grid = grid_from(s, "sigma2_grid", log_grid());

  double gamma = static_cast<double>(d) / n;
  MpFunctionals mp = mp_functionals(gamma);
  double lambda_limit = gamma * mp.lambda_plus;

  std::ostringstream csv;
  csv << "# seed-mean (J, V, lambda) within rel tol " << tol
      << " of (gamma/(gamma-1), 1, gamma*lambda_plus)\n";
  csv << "seed,n,d,gamma,j_pi,v_pi,lambda_sigma\n";
  double j_mean = 0.0, v_mean = 0.0, l_mean = 0.0;
  NoiseCurve first_curve;
  for (int i = 0; i < seeds; ++i) {
    std::uint64_t s_i = seed + i;
    run.note_seed("design/" + std::to_string(i), s_i);
    ModelInstance model(make_design(n, d, EntryLaw::Gaussian, s_i), PriorSpec::isotropic(d),
                        sigma2);
    InfoParams params = compute_info_params(model);
    j_mean += params.j_pi / seeds;
    v_mean += params.v_pi / seeds;
    l_mean += params.lambda_sigma / seeds;
    csv << s_i << "," << n << "," << d << "," << format_g17(gamma) << ","
        << format_g17(params.j_pi) << "," << format_g17(params.v_pi) << ","
        << format_g17(params.lambda_sigma) << "\n";
    if (i == 0) {
      first_curve = noise_curve(model, grid, true);
      audit_exact_curve(run, "isotropic", first_curve);
      if (s.has("reps")) {
        std::int64_t reps = s.get_int("reps");
        std::uint64_t mc_seed = derive_seed(seed, 0xabc);
        run.note_seed("train_mc", mc_seed, reps);
        MonteCarloEstimate mc = train_error_mc(model, reps, mc_seed);
        double exact = train_error_exact(model);
        run.check("isotropic.train_mc", std::abs(mc.value - exact) <= 4.0 * mc.stderr_,
                  "mc=" + format_g17(mc.value) + " exact=" + format_g17(exact) +
                      " se=" + format_g17(mc.stderr_));
      }
    }
  }
  run.write_output("params.csv", csv.str());
  run.write_output("curve.csv", first_curve.to_csv({"isotropic noise curve, first seed",
                                                    "sandwich tolerance 1e-10 relative"}));

  run.check("isotropic.j_limit", within_rel(j_mean, mp.inv_mean, tol),
            rel_detail("J", j_mean, mp.inv_mean, tol));
  run.check("isotropic.v_limit", within_rel(v_mean, mp.mean, tol),
            rel_detail("V", v_mean, mp.mean, tol));
  run.check("isotropic.lambda_limit", within_rel(l_mean, lambda_limit, tol),
            rel_detail("lambda", l_mean, lambda_limit, tol));
}

void run_lowrank(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  int n = static_cast<int>(s.get_int("n"));
  int d = static_cast<int>(s.get_int("d"));
  int r = static_cast<int>(s.get_int("r"));
  double eta = s.get_double("eta");
  int seeds = static_cast<int>(s.get_int_or("seeds", 5));
  std::uint64_t seed = s.get_seed_or("seed", 1);
  double tol = s.get_double_or("tol_limits", 0.05);
  double sigma2 = s.get_double_or("sigma2", 1.0);
  std::vector<double> grid = grid_from(s, "sigma2_grid", log_grid());

  double gamma = static_cast<double>(d) / n;
  double rho = static_cast<double>(r) / n;
  LowRankLimit limit = lowrank_limit_params(gamma, rho, eta);

  std::ostringstream csv;
  csv << "# rank-perturbed prior at gamma=" << gamma << " rho=" << rho << " eta=" << eta
      << "; seed-mean within rel tol " << tol << "\n";
  csv << "seed,n,d,r,eta,j_pi,v_pi,lambda_sigma,j_limit,regime\n";
  double j_mean = 0.0, v_mean = 0.0, l_mean = 0.0;
  NoiseCurve first_curve;
  for (int i = 0; i < seeds; ++i) {
    std::uint64_t s_i = seed + i;
    run.note_seed("design/" + std::to_string(i), s_i);
    ModelInstance model(make_design(n, d, EntryLaw::Gaussian, s_i),
                        PriorSpec::low_rank(d, r, eta), sigma2);
    InfoParams params = compute_info_params(model);
    j_mean += params.j_pi / seeds;
    v_mean += params.v_pi / seeds;
    l_mean += params.lambda_sigma / seeds;
    csv << s_i << "," << n << "," << d << "," << r << "," << format_g17(eta) << ","
        << format_g17(params.j_pi) << "," << format_g17(params.v_pi) << ","
        << format_g17(params.lambda_sigma) << "," << format_g17(limit.j_limit) << ","
        << limit.regime << "\n";
    if (i == 0) {
      first_curve = noise_curve(model, grid, true);
      audit_exact_curve(run, "lowrank", first_curve);
    }
  }
  run.write_output("params.csv", csv.str());
  run.write_output("curve.csv", first_curve.to_csv({"rank-perturbed noise curve, first seed"}));

  run.check("lowrank.j_limit", within_rel(j_mean, limit.j_limit, tol),
            rel_detail("J", j_mean, limit.j_limit, tol));
  run.check("lowrank.v_limit", within_rel(v_mean, limit.v_limit, tol),
            rel_detail("V", v_mean, limit.v_limit, tol));
  run.check("lowrank.lambda_limit", within_rel(l_mean, limit.lambda_limit, tol),
            rel_detail("lambda", l_mean, limit.lambda_limit, tol));
}

void run_lowrank_exact(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  int n = static_cast<int>(s.get_int("n"));
  int d = static_cast<int>(s.get_int("d"));
  int r = static_cast<int>(s.get_int("r"));
  int seeds = static_cast<int>(s.get_int_or("seeds", 5));
  std::uint64_t seed = s.get_seed_or("seed", 1);
  double tol = s.get_double_or("tol_train", 0.01);
  std::vector<double> grid = grid_from(s, "sigma2_grid", {0.01, 0.05});

  double rho = static_cast<double>(r) / n;
  std::ostringstream csv;
  csv << "# exact low-rank prior: seed-mean Train within rel tol " << tol
      << " of the two-term expansion\n";
  csv << "sigma2,seed,train,limit_value,limit_expansion\n";
  bool all_pass = true;
  std::string detail;
  for (double sigma2 : grid) {
    LowRankTrainLimit limit = exact_lowrank_train_limit(rho, sigma2);
    double mean = 0.0;
    for (int i = 0; i < seeds; ++i) {
      std::uint64_t s_i = seed + i;
      if (sigma2 == grid.front()) run.note_seed("design/" + std::to_string(i), s_i);
      ModelInstance model(make_design(n, d, EntryLaw::Gaussian, s_i),
                          PriorSpec::low_rank(d, r, 0.0), sigma2);
      double train = train_error_exact(model);
      mean += train / seeds;
      csv << format_g17(sigma2) << "," << s_i << "," << format_g17(train) << ","
          << format_g17(limit.value) << "," << format_g17(limit.expansion) << "\n";
    }
    if (!within_rel(mean, limit.expansion, tol)) {
      all_pass = false;
      detail +=
          rel_detail("train(sigma2=" + format_g17(sigma2) + ")", mean, limit.expansion, tol) +
          "; ";
    }
  }
  run.write_output("train.csv", csv.str());
  run.check("lowrank-exact.train_limit", all_pass, all_pass ? "all grid points pass" : detail);
}

void run_sparse(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  int n = static_cast<int>(s.get_int("n"));
  int d = static_cast<int>(s.get_int("d"));
  int K = static_cast<int>(s.get_int("K"));
  double eta = s.get_double("eta");
  std::int64_t reps = s.get_int_or("reps", 20000);
  std::uint64_t seed = s.get_seed_or("seed", 1);
  double sigma2 = s.get_double_or("sigma2", 0.5);
  double band_lo = s.get_double_or("band_lo", 0.8);
  double band_hi = s.get_double_or("band_hi", 1.2);

  double gamma = static_cast<double>(d) / n;
  FisherBounds bounds = sparse_fisher_bounds(gamma, eta);

  run.note_seed("design", seed);
  ModelInstance model(make_design(n, d, EntryLaw::Gaussian, seed),
                      PriorSpec::sparse_mixture(d, K, eta), sigma2);
  std::uint64_t mc_seed = derive_seed(seed, 0xf15);
  run.note_seed("fisher_mc", mc_seed, reps);
  InfoParams params = compute_info_params(model, reps, mc_seed);

  std::ostringstream csv;
  csv << "# sparse mixture Fisher parameter; finite-n band [" << band_lo << "*lower, " << band_hi
      << "*upper]\n";
  csv << "n,d,K,eta,gamma,j_pi,j_stderr,v_pi,lambda_sigma,bound_lower,bound_upper\n";
  csv << n << "," << d << "," << K << "," << format_g17(eta) << "," << format_g17(gamma) << ","
      << format_g17(params.j_pi) << "," << format_g17(params.j_stderr) << ","
      << format_g17(params.v_pi) << "," << format_g17(params.lambda_sigma) << ","
      << format_g17(bounds.lower) << "," << format_g17(bounds.upper) << "\n";
  run.write_output("fisher.csv", csv.str());

  bool in_band = params.j_pi >= band_lo * bounds.lower && params.j_pi <= band_hi * bounds.upper;
  run.check("sparse.fisher_band", in_band,
            "J=" + format_g17(params.j_pi) + " band=[" + format_g17(band_lo * bounds.lower) +
                ", " + format_g17(band_hi * bounds.upper) + "]");
  run.check("sparse.v_exact", within_rel(params.v_pi, 1.0, 0.05),
            rel_detail("V", params.v_pi, 1.0, 0.05));
}

void run_scalar(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  double eta = s.get_double_or("eta", 0.05);
  double grid_min = s.get_double_or("grid_min", 1e-3);
  double grid_max = s.get_double_or("grid_max", 10.0);
  int grid_points = static_cast<int>(s.get_int_or("grid_points", 120));

  ScalarMixture mix{eta, 1.0};
  std::vector<double> grid = log_grid(grid_min, grid_max, grid_points);
  std::vector<Figure2Row> rows = figure2_curves(mix, grid);
  run.write_output("figure2.csv",
                   figure2_csv(rows, {"scalar two-point mixture, eta=" + format_g17(eta),
                                      "monotonicity tolerance 1e-12 relative"}));

  int train_up_violations = 0, j_down_violations = 0;
  bool interior_max = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].train < rows[i - 1].train * (1.0 - 1e-12)) ++train_up_violations;
    if (rows[i].train_over_t2 > rows[i - 1].train_over_t2 * (1.0 + 1e-12)) ++j_down_violations;
    if (i + 1 < rows.size() && rows[i].train_over_t > rows[i - 1].train_over_t &&
        rows[i].train_over_t > rows[i + 1].train_over_t)
      interior_max = true;
  }
  run.check("scalar.train_nondecreasing", train_up_violations == 0,
            std::to_string(train_up_violations) + " violations");
  run.check("scalar.j_nonincreasing", j_down_violations == 0,
            std::to_string(j_down_violations) + " violations");
  run.check("scalar.train_over_t_extremum", interior_max,
            interior_max ? "strict interior local maximum found" : "no interior extremum");

  bool mmse_ok = true;
  std::string mmse_detail;
  for (double snr : {0.1, 1.0, 10.0}) {
    MmseDerivative der = mmse_derivative_check(mix, snr);
    double rel = std::abs(der.analytic - der.fd) / std::abs(der.analytic);
    if (!(rel <= 1e-5)) mmse_ok = false;
    mmse_detail += "s=" + format_g17(snr) + ":rel=" + format_g17(rel) + " ";
  }
  run.check("scalar.mmse_derivative", mmse_ok, mmse_detail + "(tol 1e-5 relative)");

  Sigma6Expansion expansion = sigma6_expansion_check(mix);
  run.check("scalar.sigma6", expansion.max_t_valid >= 1e-4,
            "max_t_valid=" + format_g17(expansion.max_t_valid) +
                " j0=" + format_g17(expansion.j0) +
                " jprime0=" + format_g17(expansion.jprime0));
}

void run_rmt_convergence(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  double gamma = s.get_double_or("gamma", 4.0);
  double rho = s.get_double_or("rho", 0.5);
  double eta = s.get_double_or("eta", 0.2);
  int seeds = static_cast<int>(s.get_int_or("seeds", 5));
  int n_small = static_cast<int>(s.get_int_or("n_small", 100));
  int n_large = static_cast<int>(s.get_int_or("n_large", 400));
  double sigma2 = s.get_double_or("sigma2", 0.05);
  std::uint64_t seed = s.get_seed_or("seed", 1);
  double edge_slack = s.get_double_or("edge_slack", 0.03);

  auto family_error = [&](const std::string& family, int n) {
    int d = static_cast<int>(std::lround(gamma * n));
    int r = static_cast<int>(std::lround(rho * n));
    double err = 0.0;
    for (int i = 0; i < seeds; ++i) {
      std::uint64_t s_i = derive_seed(seed, 1000 * n + i);
      run.note_seed(family + "/n" + std::to_string(n) + "/" + std::to_string(i), s_i);
      DesignMatrix X = make_design(n, d, EntryLaw::Gaussian, s_i);
      if (family == "isotropic") {
        ModelInstance model(std::move(X), PriorSpec::isotropic(d), 1.0);
        double limit = mp_functionals(gamma).inv_mean;
        err += std::abs(compute_info_params(model).j_pi - limit) / limit / seeds;
      } else if (family == "lowrank") {
        ModelInstance model(std::move(X), PriorSpec::low_rank(d, r, eta), 1.0);
        double limit = lowrank_limit_params(gamma, rho, eta).j_limit;
        err += std::abs(compute_info_params(model).j_pi - limit) / limit / seeds;
      } else {
        ModelInstance model(std::move(X), PriorSpec::low_rank(d, r, 0.0), sigma2);
        double limit = exact_lowrank_train_limit(rho, sigma2).value;
        err += std::abs(train_error_exact(model) - limit) / limit / seeds;
      }
    }
    return err;
  };

  std::ostringstream csv;
  csv << "# convergence surrogate: rel_err(n_large) <= 2 * rel_err(n_small), seed-averaged\n";
  csv << "family,n_small_err,n_large_err\n";
  for (const char* family : {"isotropic", "lowrank", "lowrank-exact"}) {
    double small_err = family_error(family, n_small);
    double large_err = family_error(family, n_large);
    csv << family << "," << format_g17(small_err) << "," << format_g17(large_err) << "\n";
    bool pass = large_err <= 2.0 * small_err || large_err < 1e-4;
    run.check(std::string("rmt-convergence.") + family, pass,
              "err(" + std::to_string(n_small) + ")=" + format_g17(small_err) + " err(" +
                  std::to_string(n_large) + ")=" + format_g17(large_err));
  }

  PopulationSpectrum nu = s.has("nu") ? PopulationSpectrum::from_string(s.get("nu"))
                                      : PopulationSpectrum::low_rank(gamma, rho, eta);
  SpectralEdges edges = spectral_edges(nu, gamma);
  run.write_output("edges.csv", edges_csv(edges));
  std::vector<StieltjesSolution> trace;
  for (double z : {-10.0, -1.0, -0.1, -0.01, 0.0}) trace.push_back(solve_stieltjes(nu, gamma, z));
  run.write_output("stieltjes.csv", stieltjes_trace_csv(trace));
  int n = n_large;
  int d = static_cast<int>(std::lround(gamma * n));
  int r = static_cast<int>(std::lround(rho * n));
  double min_seen = 1e300, max_seen = -1e300;
  for (int i = 0; i < seeds; ++i) {
    std::uint64_t s_i = derive_seed(seed, 0xed6e + i);
    run.note_seed("edges/" + std::to_string(i), s_i);
    ModelInstance model(make_design(n, d, EntryLaw::Gaussian, s_i),
                        PriorSpec::low_rank(d, r, eta), 1.0);
    const Eigen::VectorXd& evals = model.pushforward_eigenvalues();
    min_seen = std::min(min_seen, evals.minCoeff());
    max_seen = std::max(max_seen, evals.maxCoeff());
  }
  bool bracket = min_seen >= edges.lambda_minus * (1.0 - edge_slack) &&
                 max_seen <= edges.lambda_plus * (1.0 + edge_slack);
  csv << "edges," << format_g17(edges.lambda_minus) << "," << format_g17(edges.lambda_plus)
      << "\n";
  run.write_output("convergence.csv", csv.str());
  run.check("rmt-convergence.edges", bracket,
            "empirical [" + format_g17(min_seen) + ", " + format_g17(max_seen) + "] vs [" +
                format_g17(edges.lambda_minus) + ", " + format_g17(edges.lambda_plus) +
                "] slack " + format_g17(edge_slack));
}

void run_bounds_audit(ExperimentRun& run) {
  const ConfigSection& s = run.config.section;
  int models = static_cast<int>(s.get_int_or("models", 20));
  int n_max = static_cast<int>(s.get_int_or("n_max", 100));
  std::uint64_t seed = s.get_seed_or("seed", 1);
  std::int64_t reps = s.get_int_or("reps", 20000);
  std::vector<double> grid = grid_from(s, "sigma2_grid", log_grid());

  int sandwich_violations = 0, tweedie_violations = 0;
  for (int i = 0; i < models; ++i) {
    run.note_seed("model/" + std::to_string(i), seed);
    ModelInstance base = random_gaussian_model(seed, i, n_max);
    InfoParams params = compute_info_params(base);
    for (double t : grid) {
      double train = train_error_exact(base.gaussian().eigenvalues(), t);
      auto [lower, upper] = bayes_train_bounds(params, t);
      double slack = 1e-10 * std::max(1.0, train);
      if (train < lower - slack || train > upper + slack) ++sandwich_violations;
    }
    run.note_seed("tweedie_y/" + std::to_string(i), derive_seed(seed, 0x7700 + i));
    std::mt19937_64 rng = make_rng(seed, 0x7700 + i);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd y(base.n());
    for (int k = 0; k < base.n(); ++k) y[k] = normal(rng);
    Eigen::VectorXd via_tweedie = fitted_values_tweedie(base, y);
    Eigen::VectorXd via_posterior = base.design().entries() * posterior_mean(base, y);
    if ((via_tweedie - via_posterior).norm() > 1e-8 * y.norm()) ++tweedie_violations;
  }
  run.check("bounds-audit.sandwich", sandwich_violations == 0,
            std::to_string(sandwich_violations) + " violations over " + std::to_string(models) +
                " models x " + std::to_string(grid.size()) + " noise levels");
  run.check("bounds-audit.tweedie", tweedie_violations == 0,
            std::to_string(tweedie_violations) + " violations (tol 1e-8 relative)");

  // Estimator zoo against the cost lower bound on one canonical model.
  int n = static_cast<int>(s.get_int_or("n", 50));
  int d = static_cast<int>(s.get_int_or("d", 200));
  double sigma2 = s.get_double_or("sigma2", 0.5);
  int ridge_levels = static_cast<int>(s.get_int_or("ridge_levels", 8));
  std::uint64_t design_seed = derive_seed(seed, 0xde51);
  run.note_seed("zoo_design", design_seed);
  ModelInstance model(make_design(n, d, EntryLaw::Gaussian, design_seed),
                      PriorSpec::isotropic(d), sigma2);
  InfoParams params = compute_info_params(model);

  std::vector<std::string> names = {"bayes", "minnorm"};
  double lambda_star = d * sigma2;  // the Bayes shrinkage level for this prior
  for (int i = 0; i < ridge_levels; ++i) {
    double factor = std::pow(10.0, -2.0 + 4.0 * i / std::max(1, ridge_levels - 1));
    names.push_back("ridge:" + format_g17(lambda_star * factor));
  }
  std::uint64_t mc_seed = derive_seed(seed, 0x200);
  run.note_seed("zoo_replicates", mc_seed, reps);
  std::vector<ComparisonRow> rows = compare_estimators(model, names, reps, mc_seed);

  std::ostringstream csv;
  csv << "# cost >= bound - 4*stderr; bayes cost within 4*stderr of 0; "
         "orthogonality within 4*stderr of 0\n";
  csv << "# regime at sigma2=" << format_g17(sigma2) << ": "
      << regime_label(classify_regime(params, sigma2)) << "\n";
  csv << "model,estimator,sigma2,train,train_se,cost,cost_se,seed\n";
  int cost_violations = 0, orth_violations = 0;
  bool bayes_ok = true;
  for (const auto& row : rows) {
    double bound = cost_lower_bound(params, sigma2, row.train.value);
    if (row.stats.cost.value < bound - 4.0 * row.stats.cost.stderr_) ++cost_violations;
    if (std::abs(row.stats.cross.value) > 4.0 * std::max(row.stats.cross.stderr_, 1e-300) &&
        row.name != "bayes")
      ++orth_violations;
    if (row.name == "bayes" &&
        !(std::abs(row.stats.cost.value) <= 4.0 * row.stats.cost.stderr_ + 1e-18))
      bayes_ok = false;
    csv << model.describe() << "," << row.name << "," << format_g17(sigma2) << ","
        << format_g17(row.train.value) << "," << format_g17(row.train.stderr_) << ","
        << format_g17(row.stats.cost.value) << "," << format_g17(row.stats.cost.stderr_) << ","
        << mc_seed << "\n";
  }
  run.write_output("estimators.csv", csv.str());
  run.check("bounds-audit.cost_bound", cost_violations == 0,
            std::to_string(cost_violations) + " estimators below the bound");
  run.check("bounds-audit.bayes_cost", bayes_ok, "bayes excess prediction error is zero");
  run.check("bounds-audit.orthogonality", orth_violations == 0,
            std::to_string(orth_violations) + " estimators with nonzero cross term");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_section(const ConfigSection& section) {
  ExperimentConfig config;
  config.section = section;
  config.experiment = section.name;
  config.output_dir = section.get_or("output_dir", "out");
  const auto known = list_experiments();
  if (std::find(known.begin(), known.end(), config.experiment) == known.end())
    throw ConfigError("unknown experiment '" + config.experiment + "'");
  if (section.get_or("sigma", "identity") != "identity")
    throw ConfigError("section [" + section.name +
                      "]: field 'sigma' supports only 'identity'");
  if (section.has("reps") && section.get_int("reps") < 100)
    throw ConfigError("section [" + section.name + "]: field 'reps' must be at least 100");
  return config;
}

std::vector<std::string> list_experiments() {
  return {"isotropic", "lowrank",         "lowrank-exact", "sparse",
          "scalar",    "rmt-convergence", "bounds-audit"};
}

std::string RunManifest::to_json(const ConfigSection& config) const {
  ordered_json j;
  j["experiment"] = experiment;
  j["config"] = ordered_json::object();
  for (const auto& [key, value] : config.values) j["config"][key] = value;
  j["input_hash"] = input_hash;
  j["outputs"] = outputs;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["seed_ledger"] = ordered_json::array();
  for (const auto& entry : seed_ledger) {
    ordered_json e;
    e["purpose"] = entry.purpose;
    e["seed"] = entry.seed;
    if (entry.replicates > 0) e["replicates"] = entry.replicates;
    j["seed_ledger"].push_back(e);
  }
  j["checks"] = ordered_json::array();
  for (const auto& check : checks) {
    ordered_json c;
    c["name"] = check.name;
    c["pass"] = check.pass;
    c["detail"] = check.detail;
    j["checks"].push_back(c);
  }
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

RunManifest run(const ExperimentConfig& config) {
  auto start = std::chrono::steady_clock::now();
  ExperimentRun state(config);

  std::string canonical;
  for (const auto& [key, value] : config.section.values) canonical += key + "=" + value + "\n";
  state.manifest.input_hash = content_hash(config.experiment + "\n" + canonical);

  try {
    if (config.experiment == "isotropic") run_isotropic(state);
    else if (config.experiment == "lowrank") run_lowrank(state);
    else if (config.experiment == "lowrank-exact") run_lowrank_exact(state);
    else if (config.experiment == "sparse") run_sparse(state);
    else if (config.experiment == "scalar") run_scalar(state);
    else if (config.experiment == "rmt-convergence") run_rmt_convergence(state);
    else if (config.experiment == "bounds-audit") run_bounds_audit(state);
    else throw ConfigError("unknown experiment '" + config.experiment + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    throw std::runtime_error("experiment '" + config.experiment + "': " + err.what());
  }

  auto stop = std::chrono::steady_clock::now();
  state.manifest.wall_clock_seconds = std::chrono::duration<double>(stop - start).count();
  std::filesystem::path manifest_path = state.dir / "manifest.json";
  write_file(manifest_path.string(), state.manifest.to_json(config.section));
  state.manifest.outputs.push_back(manifest_path.string());
  return state.manifest;
}

int run_config_file(const std::string& path, std::ostream& log) {
  std::vector<ConfigSection> sections = parse_config(read_file(path));
  if (sections.empty()) throw ConfigError("config file has no experiment sections");
  int failures = 0;
  for (const auto& section : sections) {
    ExperimentConfig config = ExperimentConfig::from_section(section);
    RunManifest manifest = run(config);
    for (const auto& check : manifest.checks)
      log << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << "  " << check.detail << "\n";
    log << manifest.experiment << ": " << manifest.checks.size() - manifest.failures << "/"
        << manifest.checks.size() << " checks passed, outputs in "
        << (std::filesystem::path(config.output_dir) / config.experiment).string() << "\n";
    failures += manifest.failures;
  }
  return failures;
}

Regime regime_report(const ModelInstance& model) {
  return classify_regime(compute_info_params(model), model.sigma2());
}

Regime regime_report(const ModelInstance& model, std::int64_t reps, std::uint64_t seed) {
  return classify_regime(compute_info_params(model, reps, seed), model.sigma2());
}

ModelInstance random_gaussian_model(std::uint64_t seed, int index, int n_max, double sigma2) {
  std::mt19937_64 rng = make_rng(seed, 0x9a0de1 + static_cast<std::uint64_t>(index));
  std::uniform_int_distribution<int> n_draw(20, std::max(20, n_max));
  std::uniform_real_distribution<double> gamma_draw(1.5, 6.0);
  std::uniform_real_distribution<double> rho_draw(0.3, 2.0);
  std::uniform_real_distribution<double> eta_draw(0.1, 1.0);
  int n = n_draw(rng);
  int d = std::max(n, static_cast<int>(std::lround(gamma_draw(rng) * n)));
  bool low_rank = (rng() & 1ULL) != 0;
  std::uint64_t design_seed = rng();
  DesignMatrix X = make_design(n, d, EntryLaw::Gaussian, design_seed);
  if (low_rank) {
    int r = std::clamp(static_cast<int>(std::lround(rho_draw(rng) * n)), 1, d);
    return ModelInstance(std::move(X), PriorSpec::low_rank(d, r, eta_draw(rng)), sigma2);
  }
  return ModelInstance(std::move(X), PriorSpec::isotropic(d), sigma2);
}

}  // namespace memlab
