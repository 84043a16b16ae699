#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "memlab/errors.hpp"
#include "memlab/harness.hpp"
#include "memlab/io.hpp"

using namespace memlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("memlab_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ConfigSection scalar_section(const std::string& out_dir) {
  ConfigSection s;
  s.name = "scalar";
  s.values["eta"] = "0.05";
  s.values["grid_points"] = "40";
  s.values["output_dir"] = out_dir;
  return s;
}

}  // namespace

TEST_CASE("config parsing") {
  std::string text =
      "# comment\n"
      "[isotropic]\n"
      "n = 40\n"
      "d = 120  ; trailing comment\n"
      "sigma2_grid = 0.1, 1, 10\n"
      "\n"
      "[scalar]\n"
      "eta = 0.05\n";
  auto sections = parse_config(text);
  REQUIRE(sections.size() == 2);
  CHECK(sections[0].name == "isotropic");
  CHECK(sections[0].get_int("n") == 40);
  CHECK(sections[0].get_list("sigma2_grid") == std::vector<double>{0.1, 1.0, 10.0});
  CHECK(sections[1].get_double("eta") == 0.05);

  CHECK_THROWS_AS(parse_config("key = 1\n"), ConfigError);          // key outside section
  CHECK_THROWS_AS(parse_config("[unterminated\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[a]\nnovalue\n"), ConfigError);

  // Error messages name the missing field.
  try {
    sections[0].get("reps");
    CHECK(false);
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("reps") != std::string::npos);
  }
  CHECK_THROWS_AS(sections[1].get_int("eta"), ConfigError);
}

TEST_CASE("experiment names") {
  auto names = list_experiments();
  CHECK(names.size() == 7);
  for (const char* expected : {"isotropic", "lowrank", "lowrank-exact", "sparse", "scalar",
                               "rmt-convergence", "bounds-audit"})
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());

  ConfigSection bogus;
  bogus.name = "unknown-experiment";
  CHECK_THROWS_AS(ExperimentConfig::from_section(bogus), ConfigError);

  ConfigSection wrong_sigma;
  wrong_sigma.name = "scalar";
  wrong_sigma.values["sigma"] = "toeplitz";
  CHECK_THROWS_AS(ExperimentConfig::from_section(wrong_sigma), ConfigError);

  ConfigSection thin;
  thin.name = "sparse";
  thin.values["reps"] = "50";
  CHECK_THROWS_AS(ExperimentConfig::from_section(thin), ConfigError);
}

TEST_CASE("g17 formatting round-trips doubles") {
  for (double v : {1.0 / 3.0, 2.25e-308, 9.87654321e12, -0.1}) {
    CHECK(std::stod(format_g17(v)) == v);
  }
}

TEST_CASE("scalar experiment writes deterministic outputs and passes") {
  fs::path dir_a = fresh_dir("scalar_a");
  fs::path dir_b = fresh_dir("scalar_b");

  RunManifest first = run(ExperimentConfig::from_section(scalar_section(dir_a.string())));
  RunManifest second = run(ExperimentConfig::from_section(scalar_section(dir_b.string())));
  CHECK(first.failures == 0);
  CHECK(!first.checks.empty());

  std::string csv_a = read_file((dir_a / "scalar" / "figure2.csv").string());
  std::string csv_b = read_file((dir_b / "scalar" / "figure2.csv").string());
  CHECK(csv_a == csv_b);
  CHECK(csv_a.find("t,train,train_over_t,train_over_t2,j,jprime") != std::string::npos);

  // Manifest is valid JSON with the expected fields.
  auto manifest = nlohmann::json::parse(read_file((dir_a / "scalar" / "manifest.json").string()));
  CHECK(manifest["experiment"] == "scalar");
  CHECK(manifest["failures"] == 0);
  CHECK(manifest["checks"].size() == first.checks.size());
  CHECK(manifest["config"]["eta"] == "0.05");
}

TEST_CASE("thread count does not change experiment bytes") {
  fs::path dir_a = fresh_dir("threads_a");
  fs::path dir_b = fresh_dir("threads_b");

  ConfigSection section;
  section.name = "sparse";
  section.values["n"] = "12";
  section.values["d"] = "24";
  section.values["K"] = "1";
  section.values["eta"] = "0.3";
  section.values["reps"] = "4000";
  section.values["seed"] = "5";
  section.values["band_lo"] = "0.0";   // only the byte contract matters here
  section.values["band_hi"] = "99.0";

  setenv("MEMLAB_THREADS", "1", 1);
  section.values["output_dir"] = dir_a.string();
  run(ExperimentConfig::from_section(section));
  setenv("MEMLAB_THREADS", "2", 1);
  section.values["output_dir"] = dir_b.string();
  run(ExperimentConfig::from_section(section));
  unsetenv("MEMLAB_THREADS");

  CHECK(read_file((dir_a / "sparse" / "fisher.csv").string()) ==
        read_file((dir_b / "sparse" / "fisher.csv").string()));
}

TEST_CASE("violated tolerances fail the run") {
  fs::path dir = fresh_dir("fail");
  ConfigSection section;
  section.name = "isotropic";
  section.values["n"] = "30";
  section.values["d"] = "90";
  section.values["seeds"] = "2";
  section.values["tol_limits"] = "1e-9";  // unreachable at finite n
  section.values["output_dir"] = dir.string();
  RunManifest manifest = run(ExperimentConfig::from_section(section));
  CHECK(manifest.failures > 0);
}

TEST_CASE("small experiments pass end to end") {
  SUBCASE("isotropic") {
    fs::path dir = fresh_dir("iso");
    ConfigSection section;
    section.name = "isotropic";
    section.values["n"] = "80";
    section.values["d"] = "320";
    section.values["seeds"] = "3";
    section.values["tol_limits"] = "0.10";
    section.values["reps"] = "400";
    section.values["output_dir"] = dir.string();
    RunManifest manifest = run(ExperimentConfig::from_section(section));
    CHECK(manifest.failures == 0);
    CHECK(fs::exists(dir / "isotropic" / "curve.csv"));
    CHECK(!manifest.seed_ledger.empty());
  }

  SUBCASE("lowrank") {
    fs::path dir = fresh_dir("lr");
    ConfigSection section;
    section.name = "lowrank";
    section.values["n"] = "80";
    section.values["d"] = "320";
    section.values["r"] = "40";
    section.values["eta"] = "0.3";
    section.values["seeds"] = "3";
    section.values["tol_limits"] = "0.10";
    section.values["output_dir"] = dir.string();
    CHECK(run(ExperimentConfig::from_section(section)).failures == 0);
  }

  SUBCASE("lowrank-exact") {
    fs::path dir = fresh_dir("lre");
    ConfigSection section;
    section.name = "lowrank-exact";
    section.values["n"] = "120";
    section.values["d"] = "120";
    section.values["r"] = "60";
    section.values["seeds"] = "3";
    section.values["tol_train"] = "0.02";
    section.values["output_dir"] = dir.string();
    CHECK(run(ExperimentConfig::from_section(section)).failures == 0);
  }

  SUBCASE("rmt-convergence") {
    fs::path dir = fresh_dir("conv");
    ConfigSection section;
    section.name = "rmt-convergence";
    section.values["n_small"] = "60";
    section.values["n_large"] = "180";
    section.values["seeds"] = "3";
    section.values["edge_slack"] = "0.05";
    section.values["output_dir"] = dir.string();
    CHECK(run(ExperimentConfig::from_section(section)).failures == 0);
  }

  SUBCASE("bounds-audit") {
    fs::path dir = fresh_dir("audit");
    ConfigSection section;
    section.name = "bounds-audit";
    section.values["models"] = "6";
    section.values["n_max"] = "50";
    section.values["n"] = "20";
    section.values["d"] = "60";
    section.values["reps"] = "3000";
    section.values["ridge_levels"] = "4";
    section.values["output_dir"] = dir.string();
    RunManifest manifest = run(ExperimentConfig::from_section(section));
    CHECK(manifest.failures == 0);
    std::string csv = read_file((dir / "bounds-audit" / "estimators.csv").string());
    CHECK(csv.find("model,estimator,sigma2,train,train_se,cost,cost_se,seed") !=
          std::string::npos);
  }
}

TEST_CASE("config file driver") {
  fs::path dir = fresh_dir("driver");
  fs::path config_path = dir / "experiments.ini";
  {
    std::ofstream out(config_path);
    out << "[scalar]\neta = 0.05\ngrid_points = 30\noutput_dir = " << (dir / "out").string()
        << "\n";
  }
  std::ostringstream log;
  int failures = run_config_file(config_path.string(), log);
  CHECK(failures == 0);
  CHECK(log.str().find("[PASS]") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "scalar" / "manifest.json"));

  fs::path empty_path = dir / "empty.ini";
  write_file(empty_path.string(), "# nothing here\n");
  CHECK_THROWS_AS(run_config_file(empty_path.string(), log), ConfigError);
}

TEST_CASE("regime report") {
  ModelInstance model(make_design(100, 400, EntryLaw::Gaussian, 8), PriorSpec::isotropic(400),
                      0.1);
  CHECK(regime_report(model) == Regime::MemorizationNecessary);
  ModelInstance noisy(make_design(100, 400, EntryLaw::Gaussian, 8), PriorSpec::isotropic(400),
                      10.0);
  CHECK(regime_report(noisy) == Regime::OverfittingHarmful);
  ModelInstance between(make_design(100, 400, EntryLaw::Gaussian, 8), PriorSpec::isotropic(400),
                        0.9);
  CHECK(regime_report(between) == Regime::Neither);

  ModelInstance sparse(make_design(10, 30, EntryLaw::Gaussian, 9),
                       PriorSpec::sparse_mixture(30, 1, 0.5), 0.01);
  CHECK(regime_report(sparse, 2000, 77) == Regime::MemorizationNecessary);
}
