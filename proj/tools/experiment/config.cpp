#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/lattice.hpp"

namespace rwre::cli {

namespace {

[[noreturn]] void bad(const std::string& what) { raise(ErrorKind::InvalidConfig, what); }

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) bad(key + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(key + ": cannot read '" + node.Scalar() + "'");
  }
}

nlohmann::json to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Sequence: {
      auto out = nlohmann::json::array();
      for (const auto& n : node) out.push_back(to_json(n));
      return out;
    }
    case YAML::NodeType::Map: {
      auto out = nlohmann::json::object();
      for (const auto& kv : node) out[kv.first.Scalar()] = to_json(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      long long i = 0;
      double d = 0.0;
      bool b = false;
      if (YAML::convert<long long>::decode(node, i)) return i;
      if (YAML::convert<double>::decode(node, d)) return d;
      if (YAML::convert<bool>::decode(node, b)) return b;
      return s;
    }
    default:
      return nullptr;
  }
}

std::vector<double> vector_of(const YAML::Node& node, const std::string& key) {
  if (node.IsScalar()) return {scalar<double>(node, key)};
  if (!node.IsSequence()) bad(key + ": expected a number or a list");
  std::vector<double> out;
  for (const auto& n : node) out.push_back(scalar<double>(n, key));
  return out;
}

std::vector<std::vector<double>> grid_of(const YAML::Node& node, const std::string& key, int d) {
  if (!node.IsSequence() || node.size() == 0) bad(key + ": expected a nonempty list");
  std::vector<std::vector<double>> out;
  for (const auto& n : node) {
    auto v = vector_of(n, key);
    if (static_cast<int>(v.size()) != d) {
      bad(key + ": entry has " + std::to_string(v.size()) + " components, dimension is " +
          std::to_string(d));
    }
    out.push_back(std::move(v));
  }
  return out;
}

EnvironmentLaw law_of(const YAML::Node& node) {
  if (!node.IsMap()) bad("law: expected a map");
  for (const auto& kv : node) {
    const auto k = kv.first.Scalar();
    if (k != "dimension" && k != "atoms" && k != "weights") bad("law: unknown key '" + k + "'");
  }
  if (!node["dimension"]) bad("law.dimension is required");
  const int d = scalar<int>(node["dimension"], "law.dimension");
  if (d < 1 || d > kMaxDimension) bad("law.dimension must be in 1.." + std::to_string(kMaxDimension));
  const auto atoms_node = node["atoms"];
  if (!atoms_node || !atoms_node.IsSequence() || atoms_node.size() == 0) {
    bad("law.atoms must be a nonempty list of step maps");
  }
  std::vector<TransitionKernel> atoms;
  for (const auto& a : atoms_node) {
    if (!a.IsMap()) bad("law.atoms: each atom is a map like {+x: 0.6, -x: 0.4}");
    std::vector<double> probs(static_cast<std::size_t>(2 * d), 0.0);
    std::set<int> seen;
    for (const auto& kv : a) {
      const Step s = parse_step_token(kv.first.Scalar(), d);
      if (!seen.insert(s.index()).second) bad("law.atoms: step " + s.token() + " listed twice");
      probs[static_cast<std::size_t>(s.index())] = scalar<double>(kv.second, "law.atoms." + s.token());
    }
    atoms.emplace_back(d, std::move(probs));
  }
  std::vector<double> weights;
  if (node["weights"]) {
    weights = vector_of(node["weights"], "law.weights");
  } else if (atoms.size() == 1) {
    weights = {1.0};
  } else {
    bad("law.weights is required when there is more than one atom");
  }
  if (weights.size() != atoms.size()) bad("law.weights must have one entry per atom");
  return make_law(d, std::move(atoms), std::move(weights));
}

Task task_of(const std::string& s) {
  for (const Task t : {Task::LambdaSweep, Task::RateCurve, Task::Tilted, Task::BoundaryProbe,
                       Task::OracleCrosscheck, Task::OracleTable}) {
    if (task_name(t) == s) return t;
  }
  bad("unknown task '" + s + "'");
}

CylinderSpec cylinder_of(const YAML::Node& node, int d, const std::filesystem::path& base_dir) {
  if (!node.IsMap()) bad("cylinder: expected a map");
  CylinderSpec spec;
  std::optional<CylinderFunction> f;
  if (node["table"] && node["table_file"]) bad("cylinder: give either table or table_file");
  if (node["table"]) {
    const auto t = node["table"];
    if (!t.IsMap()) bad("cylinder.table: expected a map of step strings to values");
    for (const auto& kv : t) spec.table[kv.first.Scalar()] = scalar<double>(kv.second, "cylinder.table");
  } else if (node["table_file"]) {
    const auto path = base_dir / scalar<std::string>(node["table_file"], "cylinder.table_file");
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoError, "cannot open cylinder table " + path.string());
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) bad("cylinder table: expected 'steps,value' lines");
      const std::string key = line.substr(0, comma);
      const std::string value = line.substr(comma + 1);
      if (header && key == "steps") {
        header = false;
        continue;
      }
      header = false;
      try {
        spec.table[key] = std::stod(value);
      } catch (const std::exception&) {
        bad("cylinder table: bad value '" + value + "'");
      }
    }
  } else {
    bad("cylinder: table or table_file is required");
  }
  if (spec.table.empty()) bad("cylinder: table is empty");
  spec.depth = spec.table.begin()->first.size();
  for (const auto& [k, v] : spec.table) {
    if (k.size() != spec.depth) bad("cylinder: all step strings must have the same length");
    decode_steps(k, d);
  }
  if (node["depth"] && scalar<std::size_t>(node["depth"], "cylinder.depth") != spec.depth) {
    bad("cylinder.depth does not match the table's step strings");
  }
  return spec;
}

const std::set<std::string> kTopKeys{
    "law",     "direction", "task",    "theta",     "xi",     "n_cycles",     "runs",
    "seed",    "cycle_cap", "tolerance", "invert_tolerance", "max_iter", "z_crit", "min_ess",
    "n_list",  "cylinder",  "k_max",   "block_scheme", "output", "confirmation_margin",
    "max_starved_walks"};

}  // namespace

std::string_view task_name(Task t) {
  switch (t) {
    case Task::LambdaSweep: return "lambda-sweep";
    case Task::RateCurve: return "rate-curve";
    case Task::Tilted: return "tilted";
    case Task::BoundaryProbe: return "boundary-probe";
    case Task::OracleCrosscheck: return "oracle-crosscheck";
    case Task::OracleTable: return "oracle-table";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    bad(std::string("YAML: ") + e.what());
  }
  if (!root.IsMap()) bad("top level must be a map");
  for (const auto& kv : root) {
    if (!kTopKeys.count(kv.first.Scalar())) bad("unknown key '" + kv.first.Scalar() + "'");
  }

  ExperimentConfig c;
  c.source_text = text;
  c.echo = to_json(root);

  if (!root["task"]) bad("task is required");
  c.task = task_of(scalar<std::string>(root["task"], "task"));
  if (!root["seed"]) bad("seed is required");
  c.harvest.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (!root["law"]) bad("law is required");
  c.law = law_of(root["law"]);
  const int d = c.law->dimension();

  if (root["direction"]) {
    const auto n = root["direction"];
    if (!(n.IsScalar() && n.Scalar() == "auto")) {
      c.direction = vector_of(n, "direction");
      if (static_cast<int>(c.direction.size()) != d) bad("direction must have one entry per dimension");
    }
  }

  if (root["n_cycles"]) c.harvest.n_cycles = scalar<std::size_t>(root["n_cycles"], "n_cycles");
  if (root["runs"]) c.harvest.runs = scalar<std::size_t>(root["runs"], "runs");
  if (root["cycle_cap"]) c.harvest.cycle_cap = scalar<std::size_t>(root["cycle_cap"], "cycle_cap");
  if (root["confirmation_margin"]) {
    c.harvest.confirmation_margin = scalar<double>(root["confirmation_margin"], "confirmation_margin");
  }
  if (root["max_starved_walks"]) {
    c.harvest.max_starved_walks = scalar<std::size_t>(root["max_starved_walks"], "max_starved_walks");
  }
  if (c.harvest.n_cycles == 0 || c.harvest.runs == 0 || c.harvest.cycle_cap == 0) {
    bad("n_cycles, runs and cycle_cap must be positive");
  }
  if (root["tolerance"]) c.tolerance = scalar<double>(root["tolerance"], "tolerance");
  if (root["invert_tolerance"]) c.invert_tolerance = scalar<double>(root["invert_tolerance"], "invert_tolerance");
  if (root["max_iter"]) c.max_iter = scalar<int>(root["max_iter"], "max_iter");
  if (root["z_crit"]) c.z_crit = scalar<double>(root["z_crit"], "z_crit");
  if (root["min_ess"]) c.min_ess = scalar<double>(root["min_ess"], "min_ess");
  if (!(c.tolerance > 0 && c.invert_tolerance > 0 && c.max_iter > 0 && c.z_crit > 0)) {
    bad("tolerances, max_iter and z_crit must be positive");
  }

  if (root["theta"]) c.theta = grid_of(root["theta"], "theta", d);
  if (root["xi"]) c.xi = grid_of(root["xi"], "xi", d);
  if (root["n_list"]) {
    for (const auto& n : root["n_list"]) c.n_list.push_back(scalar<int>(n, "n_list"));
  }
  if (root["cylinder"]) c.cylinder = cylinder_of(root["cylinder"], d, base_dir);
  if (root["k_max"]) c.k_max = scalar<std::size_t>(root["k_max"], "k_max");
  if (root["block_scheme"]) {
    const auto s = scalar<std::string>(root["block_scheme"], "block_scheme");
    if (s == "non-overlapping") {
      c.scheme = BlockScheme::NonOverlapping;
    } else if (s == "overlapping") {
      c.scheme = BlockScheme::Overlapping;
    } else {
      bad("block_scheme must be non-overlapping or overlapping");
    }
  }
  if (const auto out = root["output"]) {
    if (!out.IsMap()) bad("output: expected a map");
    for (const auto& kv : out) {
      const auto k = kv.first.Scalar();
      if (k == "csv") {
        c.csv_name = scalar<std::string>(kv.second, "output.csv");
      } else if (k == "provenance") {
        c.provenance_name = scalar<std::string>(kv.second, "output.provenance");
      } else {
        bad("output: unknown key '" + k + "'");
      }
    }
  }

  switch (c.task) {
    case Task::LambdaSweep:
    case Task::BoundaryProbe:
      if (c.theta.empty()) bad("task needs a theta grid");
      break;
    case Task::RateCurve:
      if (c.xi.empty()) bad("task needs a xi grid");
      break;
    case Task::Tilted:
      if (c.theta.empty()) bad("task needs a theta grid");
      if (!c.cylinder) bad("task needs a cylinder function");
      if (c.k_max == 0) c.k_max = c.cylinder->depth;
      if (c.k_max < c.cylinder->depth) bad("k_max must be at least the cylinder depth");
      break;
    case Task::OracleCrosscheck:
    case Task::OracleTable:
      if (c.theta.empty()) bad("task needs a theta grid");
      if (c.n_list.empty()) bad("task needs n_list");
      break;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace rwre::cli
