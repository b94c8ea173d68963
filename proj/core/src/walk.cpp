#include "rwre/walk.hpp"

#include "rwre/error.hpp"

namespace rwre {

Path::Path(int dimension, std::vector<std::uint8_t> steps)
    : dimension_(dimension), steps_(std::move(steps)) {
  if (dimension < 1 || dimension > kMaxDimension) {
    raise(ErrorKind::InvalidArgument, "path dimension out of range");
  }
  for (const auto s : steps_) {
    if (s >= step_count(dimension)) raise(ErrorKind::InvalidArgument, "step outside dimension");
  }
}

std::vector<Point> Path::positions() const {
  std::vector<Point> out;
  out.reserve(steps_.size() + 1);
  Point p{};
  out.push_back(p);
  for (const auto s : steps_) {
    advance(p, Step(s));
    out.push_back(p);
  }
  return out;
}

std::vector<double> Path::levels(std::span<const double> u) const {
  std::vector<double> out;
  out.reserve(steps_.size() + 1);
  Point p{};
  out.push_back(project(p, u));
  for (const auto s : steps_) {
    advance(p, Step(s));
    out.push_back(project(p, u));
  }
  return out;
}

std::size_t AnnealedWalker::PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (const auto c : p) {
    h = StreamRng::mix(h ^ static_cast<std::uint32_t>(c));
  }
  return static_cast<std::size_t>(h);
}

AnnealedWalker::AnnealedWalker(const EnvironmentLaw& law, StreamRng rng)
    : law_(&law), rng_(rng), dimension_(law.dimension()) {
  double acc = 0.0;
  for (const double w : law.weights()) {
    acc += w;
    atom_cdf_.push_back(acc);
  }
  atom_cdf_.back() = 1.0;
  for (const auto& atom : law.atoms()) {
    std::vector<double> cdf;
    double c = 0.0;
    for (const double p : atom.probs()) {
      c += p;
      cdf.push_back(c);
    }
    cdf.back() = 1.0;
    step_cdf_.push_back(std::move(cdf));
  }
}

std::uint32_t AnnealedWalker::draw_atom() {
  ++sites_drawn_;
  if (atom_cdf_.size() == 1) return 0;
  const double u = rng_.uniform();
  std::uint32_t a = 0;
  while (a + 1 < atom_cdf_.size() && u >= atom_cdf_[a]) ++a;
  return a;
}

std::uint32_t AnnealedWalker::atom_at(const Point& p) {
  if (dimension_ == 1) {
    const std::int64_t x = p[0];
    auto& line = x >= 0 ? line_pos_ : line_neg_;
    const auto i = static_cast<std::size_t>(x >= 0 ? x : -x - 1);
    if (i >= line.size()) line.resize(std::max(i + 1, 2 * line.size()), 0);
    if (line[i] == 0) line[i] = draw_atom() + 1;
    return line[i] - 1;
  }
  const auto [it, inserted] = sites_.try_emplace(p, 0);
  if (inserted) it->second = draw_atom();
  return it->second;
}

Step AnnealedWalker::advance(WalkTrace* trace) {
  const std::uint32_t atom = atom_at(position_);
  const auto& cdf = step_cdf_[atom];
  const double u = rng_.uniform();
  int s = 0;
  while (s + 1 < static_cast<int>(cdf.size()) && u >= cdf[static_cast<std::size_t>(s)]) ++s;
  const Step step(s);
  rwre::advance(position_, step);
  if (trace != nullptr) {
    trace->atom_at_step.push_back(atom);
    trace->sites_drawn = sites_drawn_;
  }
  return step;
}

Path sample_walk(const EnvironmentLaw& law, std::uint64_t seed, std::size_t max_steps,
                 WalkTrace* trace) {
  if (max_steps < 1) raise(ErrorKind::InvalidArgument, "max_steps must be >= 1");
  AnnealedWalker walker(law, StreamRng(seed, 0));
  std::vector<std::uint8_t> steps;
  steps.reserve(max_steps);
  for (std::size_t k = 0; k < max_steps; ++k) {
    steps.push_back(static_cast<std::uint8_t>(walker.advance(trace).index()));
  }
  return Path(law.dimension(), std::move(steps));
}

}  // namespace rwre
