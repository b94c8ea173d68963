#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiment/config.hpp"
#include "experiment/runner.hpp"
#include "rwre/error.hpp"
#include "../support.hpp"

using namespace rwre;
using namespace rwre::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rwre_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

const char* kSweep = R"(
law:
  dimension: 1
  atoms:
    - {+x: 0.6, -x: 0.4}
direction: auto
task: lambda-sweep
theta: [0.25, 0.5]
n_cycles: 20000
runs: 8
seed: 11
output:
  csv: sweep.csv
  provenance: sweep.json
)";

}  // namespace

TEST_CASE("config errors") {
  CHECK(rwre::testing::error_kind([] { parse_config("task: lambda-sweep\ntheta: [0.1]\n"); }) ==
        ErrorKind::InvalidConfig);
  CHECK(rwre::testing::error_kind([] { parse_config(std::string(kSweep) + "bogus_key: 1\n"); }) ==
        ErrorKind::InvalidConfig);
  CHECK(rwre::testing::error_kind([] { parse_config("law: [\n"); }) == ErrorKind::InvalidConfig);
  CHECK(rwre::testing::error_kind([] {
          parse_config(R"(
law: {dimension: 1, atoms: [{+x: 0.6, -x: 0.5}]}
task: lambda-sweep
theta: [0.1]
seed: 1
)");
        }) == ErrorKind::NotAProbability);
  CHECK(rwre::testing::error_kind([] { load_config("/nonexistent/config.yaml"); }).has_value());
}

TEST_CASE("ellipticity violation stops before any output") {
  const auto dir = scratch("elliptic");
  const std::string text = R"(
law: {dimension: 1, atoms: [{+x: 1.0}]}
task: lambda-sweep
theta: [0.1]
seed: 1
output: {csv: never.csv}
)";
  std::optional<ErrorKind> kind;
  try {
    run_experiment(parse_config(text), {.out_dir = dir});
  } catch (const Error& e) {
    kind = e.kind();
    const auto record = error_record(e);
    CHECK(record["error"] == "EllipticityViolated");
    CHECK(record["exit_code"].get<int>() == error_exit_code(ErrorKind::EllipticityViolated));
  }
  CHECK(kind == ErrorKind::EllipticityViolated);
  CHECK_FALSE(fs::exists(dir / "never.csv"));
}

TEST_CASE("lambda sweep output is reproducible and matches closed forms") {
  const auto config = parse_config(kSweep);
  const auto a = scratch("sweep_a");
  const auto b = scratch("sweep_b");
  const auto c = scratch("sweep_c");
  const auto sa = run_experiment(config, {.out_dir = a, .workers = 1});
  run_experiment(config, {.out_dir = b, .workers = 4});
  run_experiment(config, {.out_dir = c, .workers = 1});
  CHECK(sa.rows == 2);
  CHECK(sa.failed_rows == 0);
  const auto text = slurp(a / "sweep.csv");
  CHECK(text == slurp(b / "sweep.csv"));
  CHECK(text == slurp(c / "sweep.csv"));

  const auto rows = rows_of(text);
  REQUIRE(rows.size() == 3);
  const auto& header = rows[0];
  REQUIRE(header.size() >= 3);
  CHECK(header[header.size() - 2] == "seed");
  CHECK(header.back() == "n_cycles");
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    FAIL("missing column " << name);
    return std::size_t{0};
  };
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    REQUIRE(row.size() == header.size());
    CHECK(row[col("seed")] == "11");
    CHECK(row[col("n_cycles")] == "20000");
    CHECK(row[col("status")] == "ok");
    const double theta = std::stod(row[col("theta_x")]);
    const double lambda = std::stod(row[col("lambda")]);
    const double se = std::stod(row[col("lambda_se")]);
    CHECK(std::abs(lambda - rwre::testing::cramer_lambda(0.6, theta)) <= 4.0 * se);
  }

  const auto prov = nlohmann::json::parse(slurp(a / "sweep.json"));
  CHECK(prov["seed"] == 11);
  CHECK(prov["task"] == "lambda-sweep");
  CHECK(prov["law_fingerprint"] == rwre::testing::classical(0.6).fingerprint());
}

TEST_CASE("seed override changes the stream") {
  const auto config = parse_config(kSweep);
  const auto a = scratch("seed_a");
  const auto b = scratch("seed_b");
  run_experiment(config, {.out_dir = a});
  run_experiment(config, {.out_dir = b, .seed_override = 12});
  const auto rows = rows_of(slurp(b / "sweep.csv"));
  CHECK(rows[1][rows[0].size() - 2] == "12");
  CHECK(slurp(a / "sweep.csv") != slurp(b / "sweep.csv"));
}

TEST_CASE("auto direction is refused for nestling laws") {
  const auto dir = scratch("nestling");
  const std::string text = R"(
law:
  dimension: 1
  atoms: [{+x: 0.85, -x: 0.15}, {+x: 0.4, -x: 0.6}]
  weights: [0.5, 0.5]
direction: auto
task: lambda-sweep
theta: [0.1]
seed: 1
output: {csv: nope.csv}
)";
  CHECK(rwre::testing::error_kind([&] { run_experiment(parse_config(text), {.out_dir = dir}); }) ==
        ErrorKind::InvalidConfig);
  CHECK_FALSE(fs::exists(dir / "nope.csv"));
}

TEST_CASE("oracle table rows") {
  const auto dir = scratch("table");
  const std::string text = R"(
law: {dimension: 1, atoms: [{+x: 0.6, -x: 0.4}]}
task: oracle-table
theta: [0.5]
n_list: [1, 2]
seed: 5
output: {csv: t.csv}
)";
  run_experiment(parse_config(text), {.out_dir = dir});
  const auto rows = rows_of(slurp(dir / "t.csv"));
  REQUIRE(rows.size() == 3);
  const double one = std::stod(rows[1][3]);
  CHECK(one == doctest::Approx(0.6 * std::exp(0.5) + 0.4 * std::exp(-0.5)));
  CHECK(rows[1].back() == "0");
}
