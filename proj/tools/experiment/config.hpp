#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"
#include "rwre/tilted.hpp"

namespace rwre::cli {

enum class Task { LambdaSweep, RateCurve, Tilted, BoundaryProbe, OracleCrosscheck, OracleTable };

std::string_view task_name(Task t);

struct CylinderSpec {
  std::size_t depth = 1;
  /// Step-code string -> value. Missing sequences evaluate to 0.
  std::map<std::string, double> table;
};

struct ExperimentConfig {
  std::optional<EnvironmentLaw> law;
  /// Empty means "auto".
  std::vector<double> direction;
  Task task = Task::LambdaSweep;
  std::vector<std::vector<double>> theta;
  std::vector<std::vector<double>> xi;
  HarvestOptions harvest;
  double tolerance = 1e-12;
  double invert_tolerance = 1e-8;
  int max_iter = 60;
  double z_crit = 3.0;
  double min_ess = 100.0;
  std::vector<int> n_list;
  std::optional<CylinderSpec> cylinder;
  std::size_t k_max = 0;
  BlockScheme scheme = BlockScheme::NonOverlapping;
  std::string csv_name = "results.csv";
  std::string provenance_name = "provenance.json";

  /// Verbatim config text and a JSON rendering of it, for the provenance sidecar.
  std::string source_text;
  nlohmann::json echo;
};

/// Parses and validates a YAML config. Relative file references resolve against base_dir.
/// Raises InvalidConfig for schema problems and the law's own kinds
/// (NotAProbability, EllipticityViolated) for invalid kernels.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rwre::cli
