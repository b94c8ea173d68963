#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "config.hpp"

namespace rwre::cli {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned workers = 1;
  bool verbose = false;
  std::optional<std::uint64_t> seed_override;
};

struct RunSummary {
  std::filesystem::path csv;
  std::filesystem::path provenance;
  std::size_t rows = 0;
  /// Rows whose status is not "ok".
  std::size_t failed_rows = 0;
};

/// Executes the configured task, writing the results CSV row by row and then the
/// provenance sidecar. Module errors that abort the task propagate as rwre::Error
/// after the completed rows have been flushed.
RunSummary run_experiment(ExperimentConfig config, const RunOptions& options);

/// Machine-readable error record.
nlohmann::json error_record(const std::exception& e);

}  // namespace rwre::cli
