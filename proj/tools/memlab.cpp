#include <CLI11.hpp>
#include <iostream>

#include "memlab/acceptance.hpp"
#include "memlab/harness.hpp"
#include "memlab/io.hpp"
#include "memlab/scalar_lab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"memlab: numerical laboratory for Bayes training error and overfitting tradeoffs"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "run the experiments in a config file");
  run_cmd->add_option("config", config_path, "INI-style experiment config")->required();

  app.add_subcommand("list-experiments", "list the available experiment names");
  app.add_subcommand("check", "run the full acceptance suite");

  double eta = 0.05, grid_min = 1e-3, grid_max = 10.0;
  int grid_points = 120;
  std::string scalar_out;
  CLI::App* scalar_cmd = app.add_subcommand("scalar", "scalar-mixture curves to CSV");
  scalar_cmd->add_option("--eta", eta, "component variance");
  scalar_cmd->add_option("--grid-min", grid_min, "smallest noise level");
  scalar_cmd->add_option("--grid-max", grid_max, "largest noise level");
  scalar_cmd->add_option("--grid-points", grid_points, "grid size");
  scalar_cmd->add_option("--output", scalar_out, "CSV path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) {
      return memlab::run_config_file(config_path, std::cout) == 0 ? 0 : 1;
    }
    if (app.got_subcommand("list-experiments")) {
      for (const auto& name : memlab::list_experiments()) std::cout << name << "\n";
      return 0;
    }
    if (app.got_subcommand("check")) {
      return memlab::run_acceptance(std::cout) == 0 ? 0 : 1;
    }
    if (app.got_subcommand("scalar")) {
      memlab::ScalarMixture mix{eta, 1.0};
      auto rows = memlab::figure2_curves(mix, memlab::log_grid(grid_min, grid_max, grid_points));
      std::string csv =
          memlab::figure2_csv(rows, {"eta=" + memlab::format_g17(eta), "deterministic quadrature"});
      if (scalar_out.empty()) {
        std::cout << csv;
      } else {
        memlab::write_file(scalar_out, csv);
      }
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
