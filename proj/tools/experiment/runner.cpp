#include "runner.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "rwre/error.hpp"
#include "rwre/lmgf.hpp"
#include "rwre/oracle.hpp"
#include "rwre/rate.hpp"
#include "rwre/tilted.hpp"
#include "rwre/version.hpp"

namespace rwre::cli {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string axis(int i) { return std::string(1, "xyzwabcd"[i]); }

// CSV sink that flushes every row, so aborted sweeps keep what they computed.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header,
            std::uint64_t seed, std::size_t n_cycles)
      : out_(path, std::ios::binary), seed_(std::to_string(seed)), n_cycles_(std::to_string(n_cycles)) {
    if (!out_) raise(ErrorKind::IoError, "cannot write " + path.string());
    header.emplace_back("seed");
    header.emplace_back("n_cycles");
    write(header);
    width_ = header.size();
  }

  void row(std::vector<std::string> cells, bool ok) {
    cells.push_back(seed_);
    cells.push_back(n_cycles_);
    if (cells.size() != width_) raise(ErrorKind::InvalidArgument, "internal: CSV row width mismatch");
    write(cells);
    ++rows_;
    if (!ok) ++failed_;
  }

  std::size_t rows() const { return rows_; }
  std::size_t failed() const { return failed_; }

 private:
  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
  }

  std::ofstream out_;
  std::string seed_;
  std::string n_cycles_;
  std::size_t width_ = 0;
  std::size_t rows_ = 0;
  std::size_t failed_ = 0;
};

void append(std::vector<std::string>& cells, const std::vector<double>& v) {
  for (const double x : v) cells.push_back(num(x));
}

void blanks(std::vector<std::string>& cells, std::size_t n) { cells.insert(cells.end(), n, ""); }

std::vector<std::string> axis_columns(const std::string& prefix, int d) {
  std::vector<std::string> out;
  for (int i = 0; i < d; ++i) out.push_back(prefix + "_" + axis(i));
  return out;
}

std::vector<std::string> matrix_columns(const std::string& prefix, int d) {
  std::vector<std::string> out;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) out.push_back(prefix + "_" + axis(i) + axis(j));
  }
  return out;
}

void append_upper(std::vector<std::string>& cells, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) cells.push_back(num(m(i, j)));
  }
}

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string status_of(const Error& e) { return std::string(e.kind_name()); }

struct Context {
  const ExperimentConfig& config;
  const RunOptions& options;
  int d;
  std::vector<double> direction;
  bool nestling = false;
  std::optional<CycleEnsemble> ensemble;
  nlohmann::json diagnostics = nlohmann::json::array();

  void log(const std::string& msg) const {
    if (options.verbose) std::cerr << "[rwre] " << msg << '\n';
  }

  LambdaOptions lambda_options() const {
    LambdaOptions o;
    o.tol = config.tolerance;
    o.classify.z_crit = config.z_crit;
    o.classify.min_ess = config.min_ess;
    return o;
  }

  InvertOptions invert_options() const {
    InvertOptions o;
    o.tol = config.invert_tolerance;
    o.max_iter = config.max_iter;
    o.lambda = lambda_options();
    return o;
  }

  const CycleEnsemble& harvest() {
    if (!ensemble) {
      HarvestOptions h = config.harvest;
      h.workers = options.workers;
      log("harvesting " + std::to_string(h.n_cycles) + " cycles in " + std::to_string(h.runs) + " runs");
      ensemble = harvest_cycles(*config.law, direction, h);
      log("simulated " + std::to_string(ensemble->simulated_steps) + " steps, " +
          std::to_string(ensemble->starved_walks) + " starved walks");
    }
    return *ensemble;
  }
};

void lambda_sweep(Context& ctx, CsvWriter& csv) {
  const int d = ctx.d;
  const auto& ens = ctx.harvest();
  for (const auto& theta : ctx.config.theta) {
    std::vector<std::string> cells;
    append(cells, theta);
    try {
      const auto est = estimate_lmgf(ens, theta, ctx.lambda_options());
      cells.push_back(std::string(region_name(est.label.region)));
      cells.push_back(num(est.lambda));
      cells.push_back(num(est.lambda_se));
      append(cells, est.grad);
      append(cells, est.grad_se);
      append_upper(cells, est.hessian);
      cells.push_back(num(est.min_eigenvalue));
      cells.push_back(num(est.ess));
      cells.emplace_back("ok");
      ctx.diagnostics.push_back({{"theta", theta}, {"ess", est.ess}});
      csv.row(std::move(cells), true);
    } catch (const Error& e) {
      const auto label = classify_theta(ens, theta, ens.nestling, ctx.lambda_options().classify);
      cells.push_back(std::string(region_name(label.region)));
      blanks(cells, 2 + 2 * static_cast<std::size_t>(d) + static_cast<std::size_t>(d * (d + 1) / 2) + 1);
      cells.push_back(num(label.ess));
      cells.push_back(status_of(e));
      ctx.diagnostics.push_back({{"theta", theta}, {"ess", label.ess}, {"error", e.what()}});
      csv.row(std::move(cells), false);
    }
  }
}

std::vector<std::string> lambda_sweep_header(int d) {
  return concat({axis_columns("theta", d), {"label", "lambda", "lambda_se"}, axis_columns("grad", d),
                 axis_columns("grad_se", d), matrix_columns("hessian", d),
                 {"min_eigenvalue", "ess", "status"}});
}

void rate_curve_task(Context& ctx, CsvWriter& csv) {
  const int d = ctx.d;
  const auto& ens = ctx.harvest();
  RateOptions ro;
  ro.invert = ctx.invert_options();
  const auto curve = rate_curve(ens, ctx.config.xi, ro);
  ctx.diagnostics.push_back({{"velocity", curve.velocity.velocity}, {"velocity_se", curve.velocity.std_error}});
  for (const auto& row : curve.rows) {
    std::vector<std::string> cells;
    append(cells, row.xi);
    if (row.point) {
      const auto& p = *row.point;
      append(cells, p.theta);
      cells.push_back(num(p.rate));
      cells.push_back(num(p.rate_se));
      cells.push_back(num(p.lambda));
      append_upper(cells, p.rate_hessian);
      cells.push_back(num(p.rate_hessian_min_eigenvalue));
      cells.push_back(num(p.fenchel_gap));
      cells.push_back(std::to_string(p.fenchel_points));
    } else {
      blanks(cells, static_cast<std::size_t>(d) + 3 + static_cast<std::size_t>(d * (d + 1) / 2) + 3);
    }
    cells.push_back(row.status);
    csv.row(std::move(cells), row.status == "ok");
  }
}

std::vector<std::string> rate_curve_header(int d) {
  return concat({axis_columns("xi", d), axis_columns("theta", d), {"rate", "rate_se", "lambda"},
                 matrix_columns("rate_hessian", d),
                 {"rate_hessian_min_eigenvalue", "fenchel_gap", "fenchel_points", "status"}});
}

void tilted_task(Context& ctx, CsvWriter& csv) {
  const int d = ctx.d;
  const auto& ens = ctx.harvest();
  const auto f = CylinderFunction::from_table(ctx.config.cylinder->depth, d, ctx.config.cylinder->table);
  const std::string scheme =
      ctx.config.scheme == BlockScheme::Overlapping ? "overlapping" : "non-overlapping";
  for (const auto& theta : ctx.config.theta) {
    const auto failed = [&](const std::string& quantity, const Error& e) {
      std::vector<std::string> cells;
      append(cells, theta);
      cells.emplace_back("");
      cells.push_back(quantity);
      blanks(cells, 4);
      cells.push_back(scheme);
      cells.push_back(status_of(e));
      csv.row(std::move(cells), false);
    };
    double lambda = 0.0;
    try {
      lambda = lambda_hat(ens, theta, ctx.lambda_options()).lambda;
    } catch (const Error& e) {
      failed("cylinder", e);
      continue;
    }
    const auto emit = [&](const std::string& quantity, const TiltedEstimate& t) {
      std::vector<std::string> cells;
      append(cells, theta);
      cells.push_back(num(lambda));
      cells.push_back(quantity);
      cells.push_back(std::to_string(t.K_used));
      cells.push_back(num(t.value));
      cells.push_back(num(t.std_error));
      cells.push_back(std::to_string(t.n_blocks));
      cells.push_back(scheme);
      cells.emplace_back("ok");
      csv.row(std::move(cells), true);
    };
    try {
      for (const auto& t : k_consistency_check(ens, theta, lambda, f, ctx.config.k_max, ctx.config.scheme)) {
        emit("cylinder", t);
      }
    } catch (const Error& e) {
      failed("cylinder", e);
    }
    try {
      const auto drift = mean_drift_tilted(ens, theta, lambda);
      for (int i = 0; i < d; ++i) emit("mean_drift_" + axis(i), drift[static_cast<std::size_t>(i)]);
    } catch (const Error& e) {
      failed("mean_drift", e);
    }
  }
}

std::vector<std::string> tilted_header(int d) {
  return concat({axis_columns("theta", d),
                 {"lambda", "quantity", "K", "value", "std_error", "n_blocks", "block_scheme", "status"}});
}

void boundary_task(Context& ctx, CsvWriter& csv) {
  const int d = ctx.d;
  const auto& ens = ctx.harvest();
  const auto probe = nestling_boundary_probe(ens, ctx.config.theta, ctx.lambda_options().classify);
  ctx.diagnostics.push_back({{"velocity", probe.velocity.velocity},
                             {"velocity_se", probe.velocity.std_error}});
  for (const auto& p : probe.points) {
    std::vector<std::string> cells;
    append(cells, p.theta);
    cells.push_back(std::string(region_name(p.label.region)));
    cells.push_back(num(p.label.statistic));
    cells.push_back(num(p.label.ess));
    if (p.grad) {
      append(cells, *p.grad);
    } else {
      blanks(cells, static_cast<std::size_t>(d));
    }
    if (p.extended_grad) {
      append(cells, *p.extended_grad);
    } else {
      blanks(cells, static_cast<std::size_t>(d));
    }
    append(cells, probe.velocity.velocity);
    cells.push_back(probe.normal_inner_product ? num(*probe.normal_inner_product) : "");
    cells.push_back(p.status);
    csv.row(std::move(cells), p.status == "ok");
  }
}

std::vector<std::string> boundary_header(int d) {
  return concat({axis_columns("theta", d), {"label", "statistic", "ess"}, axis_columns("grad", d),
                 axis_columns("extended_grad", d), axis_columns("velocity", d),
                 {"normal_inner_product", "status"}});
}

void crosscheck_task(Context& ctx, CsvWriter& csv) {
  std::optional<Error> harvest_error;
  try {
    ctx.harvest();
  } catch (const Error& e) {
    harvest_error = e;
    ctx.diagnostics.push_back({{"harvest_error", e.what()}});
  }
  for (const auto& theta : ctx.config.theta) {
    std::vector<std::string> cells;
    append(cells, theta);
    const auto fit = finite_n_lambda(*ctx.config.law, theta, ctx.config.n_list, ctx.options.workers);
    std::string status = "ok";
    std::optional<LmgfEstimate> est;
    if (harvest_error) {
      status = status_of(*harvest_error);
    } else {
      try {
        est = lambda_hat(*ctx.ensemble, theta, ctx.lambda_options());
      } catch (const Error& e) {
        status = status_of(e);
      }
    }
    cells.push_back(est ? num(est->lambda) : "");
    cells.push_back(est ? num(est->lambda_se) : "");
    cells.push_back(num(fit.lambda));
    cells.push_back(num(fit.residual));
    cells.push_back(est ? num(std::abs(est->lambda - fit.lambda)) : "");
    cells.push_back(status);
    csv.row(std::move(cells), status == "ok");
  }
}

std::vector<std::string> crosscheck_header(int d) {
  return concat({axis_columns("theta", d),
                 {"lambda_hat", "lambda_hat_se", "lambda_fit", "fit_residual", "abs_difference", "status"}});
}

void oracle_table_task(Context& ctx, CsvWriter& csv) {
  for (const auto& theta : ctx.config.theta) {
    for (const int n : ctx.config.n_list) {
      const auto r = exact_annealed_expectation(*ctx.config.law, theta, n, ctx.options.workers);
      std::vector<std::string> cells{ctx.config.law->fingerprint()};
      append(cells, theta);
      cells.push_back(std::to_string(n));
      cells.push_back(num(r.value));
      cells.push_back(std::to_string(r.path_count));
      csv.row(std::move(cells), true);
    }
  }
}

std::vector<std::string> oracle_table_header(int d) {
  return concat({{"law"}, axis_columns("theta", d), {"n", "value", "path_count"}});
}

}  // namespace

nlohmann::json error_record(const std::exception& e) {
  nlohmann::json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["error"] = std::string(err->kind_name());
    j["exit_code"] = error_exit_code(err->kind());
  } else {
    j["error"] = "Internal";
    j["exit_code"] = 1;
  }
  j["message"] = e.what();
  return j;
}

RunSummary run_experiment(ExperimentConfig config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (options.seed_override) config.harvest.seed = *options.seed_override;

  Context ctx{config, options, config.law->dimension(), config.direction, false, std::nullopt, {}};
  const bool needs_direction = config.task != Task::OracleTable;
  if (needs_direction) {
    const auto label = classify_nestling(*config.law);
    ctx.nestling = label.is_nestling();
    if (ctx.direction.empty()) {
      if (label.is_nestling()) {
        raise(ErrorKind::InvalidConfig, "direction: auto is only available for non-nestling laws");
      }
      ctx.direction = label.direction;
    }
    if (config.task == Task::BoundaryProbe && !ctx.nestling) {
      raise(ErrorKind::InvalidConfig, "boundary-probe needs a nestling law");
    }
  }

  std::filesystem::create_directories(options.out_dir);
  RunSummary summary;
  summary.csv = options.out_dir / config.csv_name;
  summary.provenance = options.out_dir / config.provenance_name;

  std::vector<std::string> header;
  switch (config.task) {
    case Task::LambdaSweep: header = lambda_sweep_header(ctx.d); break;
    case Task::RateCurve: header = rate_curve_header(ctx.d); break;
    case Task::Tilted: header = tilted_header(ctx.d); break;
    case Task::BoundaryProbe: header = boundary_header(ctx.d); break;
    case Task::OracleCrosscheck: header = crosscheck_header(ctx.d); break;
    case Task::OracleTable: header = oracle_table_header(ctx.d); break;
  }

  nlohmann::json prov;
  prov["tool"] = "rwre";
  prov["version"] = kVersion;
  prov["task"] = std::string(task_name(config.task));
  prov["config"] = config.echo;
  prov["config_text"] = config.source_text;
  prov["seed"] = config.harvest.seed;
  prov["n_cycles"] = config.harvest.n_cycles;
  prov["runs"] = config.harvest.runs;
  prov["cycle_cap"] = config.harvest.cycle_cap;
  prov["workers"] = options.workers;
  prov["law_fingerprint"] = config.law->fingerprint();
  prov["direction"] = ctx.direction;
  prov["nestling"] = ctx.nestling;
  prov["csv"] = config.csv_name;

  const auto write_provenance = [&](const std::optional<nlohmann::json>& error) {
    if (ctx.ensemble) {
      prov["harvest"] = {{"cycles", ctx.ensemble->size()},
                         {"starved_walks", ctx.ensemble->starved_walks},
                         {"simulated_steps", ctx.ensemble->simulated_steps}};
    }
    prov["diagnostics"] = ctx.diagnostics;
    prov["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error) prov["error"] = *error;
    std::ofstream out(summary.provenance);
    if (!out) raise(ErrorKind::IoError, "cannot write " + summary.provenance.string());
    out << prov.dump(2) << '\n';
  };

  const std::size_t n_cycles = config.task == Task::OracleTable ? 0 : config.harvest.n_cycles;
  CsvWriter csv(summary.csv, header, config.harvest.seed, n_cycles);
  try {
    switch (config.task) {
      case Task::LambdaSweep: lambda_sweep(ctx, csv); break;
      case Task::RateCurve: rate_curve_task(ctx, csv); break;
      case Task::Tilted: tilted_task(ctx, csv); break;
      case Task::BoundaryProbe: boundary_task(ctx, csv); break;
      case Task::OracleCrosscheck: crosscheck_task(ctx, csv); break;
      case Task::OracleTable: oracle_table_task(ctx, csv); break;
    }
  } catch (const Error& e) {
    write_provenance(error_record(e));
    throw;
  }
  write_provenance(std::nullopt);
  summary.rows = csv.rows();
  summary.failed_rows = csv.failed();
  return summary;
}

}  // namespace rwre::cli
