#include "rwre/lattice.hpp"

#include <charconv>

#include "rwre/error.hpp"

namespace rwre {

namespace {

constexpr std::string_view kAxisLetters = "xyzwabcd";
static_assert(kAxisLetters.size() == kMaxDimension);

}  // namespace

std::vector<int> Step::coordinates(int dimension) const {
  std::vector<int> z(static_cast<std::size_t>(dimension), 0);
  z[static_cast<std::size_t>(axis())] = sign();
  return z;
}

std::string Step::token() const {
  std::string out(1, sign() > 0 ? '+' : '-');
  if (axis() < 4) {
    out.push_back(kAxisLetters[static_cast<std::size_t>(axis())]);
  } else {
    out += "e" + std::to_string(axis() + 1);
  }
  return out;
}

char Step::code() const {
  const char letter = kAxisLetters[static_cast<std::size_t>(axis())];
  return sign() > 0 ? static_cast<char>(letter - 'a' + 'A') : letter;
}

Step parse_step_token(std::string_view token, int dimension) {
  const auto bad = [&](const char* why) {
    raise(ErrorKind::InvalidConfig,
          "bad step token '" + std::string(token) + "': " + why);
  };
  if (token.size() < 2) bad("too short");
  int sign = 0;
  if (token[0] == '+') sign = 1;
  else if (token[0] == '-') sign = -1;
  else bad("must start with + or -");

  const std::string_view rest = token.substr(1);
  int axis = -1;
  if (rest.size() == 1) {
    const auto pos = kAxisLetters.substr(0, 4).find(rest[0]);
    if (pos == std::string_view::npos) bad("unknown axis letter");
    axis = static_cast<int>(pos);
  } else if (rest[0] == 'e') {
    int one_based = 0;
    const auto* first = rest.data() + 1;
    const auto* last = rest.data() + rest.size();
    auto [ptr, ec] = std::from_chars(first, last, one_based);
    if (ec != std::errc() || ptr != last || one_based < 1) bad("bad axis number");
    axis = one_based - 1;
  } else {
    bad("unknown axis");
  }
  if (axis >= dimension) bad("axis exceeds dimension");
  return Step::along(axis, sign);
}

Step parse_step_code(char c, int dimension) {
  const bool positive = (c >= 'A' && c <= 'Z');
  const char lower = positive ? static_cast<char>(c - 'A' + 'a') : c;
  const auto pos = kAxisLetters.find(lower);
  if (pos == std::string_view::npos || static_cast<int>(pos) >= dimension) {
    raise(ErrorKind::InvalidConfig,
          std::string("bad step character '") + c + "'");
  }
  return Step::along(static_cast<int>(pos), positive ? 1 : -1);
}

std::string encode_steps(std::span<const std::uint8_t> steps) {
  std::string out;
  out.reserve(steps.size());
  for (const auto s : steps) out.push_back(Step(s).code());
  return out;
}

std::vector<std::uint8_t> decode_steps(std::string_view text, int dimension) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size());
  for (const char c : text) {
    out.push_back(static_cast<std::uint8_t>(parse_step_code(c, dimension).index()));
  }
  return out;
}

double project(const Point& p, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += p[i] * u[i];
  return s;
}

}  // namespace rwre
