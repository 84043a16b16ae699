#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memlab/info.hpp"
#include "memlab/io.hpp"
#include "memlab/model.hpp"

namespace memlab {

// One theorem-level assertion evaluated inside an experiment.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SeedLedgerEntry {
  std::string purpose;
  std::uint64_t seed = 0;
  std::int64_t replicates = 0;
};

struct RunManifest {
  std::string experiment;
  std::string input_hash;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  std::vector<SeedLedgerEntry> seed_ledger;
  std::vector<CheckResult> checks;
  int failures = 0;

  std::string to_json(const ConfigSection& config) const;
};

struct ExperimentConfig {
  ConfigSection section;       // raw key/value echo
  std::string experiment;      // section name
  std::string output_dir = "out";

  static ExperimentConfig from_section(const ConfigSection& section);
};

std::vector<std::string> list_experiments();

// Dispatches to the named experiment, writes its CSVs and manifest.json under
// <output_dir>/<experiment>/, and returns the manifest. Assertion failures
// are recorded in the manifest, not thrown.
RunManifest run(const ExperimentConfig& config);

// Runs every section of a config file; returns the number of failed checks.
int run_config_file(const std::string& path, std::ostream& log);

enum class RegimeLabel { MemorizationNecessary, OverfittingHarmful, Neither };
Regime regime_report(const ModelInstance& model);
Regime regime_report(const ModelInstance& model, std::int64_t reps, std::uint64_t seed);

// Deterministic family of small Gaussian-prior models used by the audit
// experiments: gamma in [1.5, 6], rank ratio in [0.3, 2], eta in [0.1, 1].
ModelInstance random_gaussian_model(std::uint64_t seed, int index, int n_max, double sigma2 = 1.0);

}  // namespace memlab
