#pragma once

#include <cstdint>

namespace rwre {

/// Counter-based random stream keyed by (seed, stream, substream).
///
/// Output i is a SplitMix64 finaliser applied to key + (i+1) * golden-gamma,
/// so any stream can be reproduced without touching the others. Walks in a
/// harvest use one stream per walk index, which makes results independent of
/// how walks are scheduled across workers.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0)
      : key_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) ^ mix(stream + 0x3c6ef372fe94f82bULL) ^
                 mix(substream + 0xa54ff53a5f1d36f1ULL))) {}

  std::uint64_t next() {
    counter_ += kGamma;
    return mix(key_ + counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t draws() const { return counter_ / kGamma; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rwre
