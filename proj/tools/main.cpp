#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "experiment/config.hpp"
#include "experiment/runner.hpp"
#include "rwre/error.hpp"
#include "rwre/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Averaged large deviations for random walks in i.i.d. random environments"};
  app.set_version_flag("--version", rwre::kVersion);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool verbose = false;
  app.add_option("-c,--config", config_path, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out-dir", out_dir, "Directory for the results CSV and provenance JSON");
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("-j,--workers", workers, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "Progress on stderr");
  CLI11_PARSE(app, argc, argv);

  rwre::cli::RunOptions options;
  options.out_dir = out_dir;
  options.workers = workers;
  options.verbose = verbose;
  options.seed_override = seed;

  try {
    const auto config = rwre::cli::load_config(config_path);
    const auto summary = rwre::cli::run_experiment(config, options);
    if (verbose) {
      std::cerr << "[rwre] wrote " << summary.rows << " rows to " << summary.csv.string() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    const auto record = rwre::cli::error_record(e);
    std::cerr << record.dump() << '\n';
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream(std::filesystem::path(out_dir) / "error.json") << record.dump(2) << '\n';
    return record["exit_code"].get<int>();
  }
}
