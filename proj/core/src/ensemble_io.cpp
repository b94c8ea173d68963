#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rwre/ensemble.hpp"
#include "rwre/error.hpp"
#include "rwre/lattice.hpp"

namespace rwre {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void write_cycle_log(const CycleEnsemble& ensemble, std::ostream& out) {
  const int d = ensemble.dimension();
  out << "# rwre-cycle-log v" << kCycleLogVersion << '\n';
  out << "# dimension=" << d << '\n';
  out << "# direction=";
  for (int i = 0; i < d; ++i) {
    out << (i ? " " : "") << format_double(ensemble.direction()[static_cast<std::size_t>(i)]);
  }
  out << '\n';
  out << "# nestling=" << (ensemble.nestling ? 1 : 0) << '\n';
  out << "# law=" << ensemble.law_fingerprint << '\n';
  out << "# seed=" << ensemble.seed << '\n';
  out << "# cycle_cap=" << ensemble.cycle_cap << '\n';
  out << "# starved_walks=" << ensemble.starved_walks << '\n';
  out << "# simulated_steps=" << ensemble.simulated_steps << '\n';
  out << "run,duration";
  for (int i = 0; i < d; ++i) out << ",disp_" << i;
  out << ",steps\n";
  const auto& runs = ensemble.runs();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t c = runs[r].begin; c < runs[r].end; ++c) {
      out << r << ',' << ensemble.duration(c);
      for (const auto x : ensemble.displacement(c)) out << ',' << x;
      out << ',' << encode_steps(ensemble.steps(c)) << '\n';
    }
  }
}

CycleEnsemble read_cycle_log(std::istream& in) {
  const auto fail = [](const std::string& why) -> void {
    raise(ErrorKind::IoError, "cycle log: " + why);
  };
  std::string line;
  if (!std::getline(in, line) ||
      line != "# rwre-cycle-log v" + std::to_string(kCycleLogVersion)) {
    fail("missing or unsupported version header");
  }

  int dimension = 0;
  std::vector<double> direction;
  bool nestling = false;
  std::string law;
  std::uint64_t seed = 0;
  std::size_t cap = 0, starved = 0, simulated = 0;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.size() < 3 || eq == std::string::npos) fail("bad header line: " + line);
    const std::string key = line.substr(2, eq - 2);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "dimension") dimension = std::stoi(value);
      else if (key == "direction") {
        std::istringstream ss(value);
        double x;
        while (ss >> x) direction.push_back(x);
      } else if (key == "nestling") nestling = value == "1";
      else if (key == "law") law = value;
      else if (key == "seed") seed = std::stoull(value);
      else if (key == "cycle_cap") cap = std::stoull(value);
      else if (key == "starved_walks") starved = std::stoull(value);
      else if (key == "simulated_steps") simulated = std::stoull(value);
    } catch (const std::exception&) {
      fail("bad value for " + key);
    }
  }
  if (dimension < 1) fail("missing dimension");

  CycleEnsemble ensemble(dimension, direction);
  ensemble.nestling = nestling;
  ensemble.law_fingerprint = law;
  ensemble.seed = seed;
  ensemble.cycle_cap = cap;
  ensemble.starved_walks = starved;
  ensemble.simulated_steps = simulated;

  if (!std::getline(in, line)) fail("missing column header");
  long current_run = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != static_cast<std::size_t>(dimension) + 3) fail("bad row: " + line);
    const long run = std::stol(fields[0]);
    if (run != current_run) {
      if (run != current_run + 1) fail("runs out of order");
      ensemble.begin_run();
      current_run = run;
    }
    const auto steps = decode_steps(fields.back(), dimension);
    if (static_cast<std::int64_t>(steps.size()) != std::stoll(fields[1])) {
      fail("duration does not match steps");
    }
    ensemble.add_cycle(steps);
    const auto disp = ensemble.displacement(ensemble.size() - 1);
    for (int i = 0; i < dimension; ++i) {
      if (disp[static_cast<std::size_t>(i)] != std::stoll(fields[2 + static_cast<std::size_t>(i)])) {
        fail("displacement does not match steps");
      }
    }
  }
  return ensemble;
}

}  // namespace rwre
