#pragma once

#include <cstdint>

namespace nmwl {

/// Deterministic random stream based on the splitmix64 generator.
///
/// Substreams are derived from a root seed and a counter index, so a set of
/// replicates produces identical draws whether it is executed serially or
/// split across workers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  /// Derive the substream for replicate `index` of root seed `root`.
  static RandomStream substream(std::uint64_t root, std::uint64_t index) {
    return RandomStream(mix(mix(root) ^ mix(index + 0x9E3779B97F4A7C15ULL)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in (0, 1).
  double next_unit() {
    // 53 random mantissa bits; zero is remapped to the smallest step.
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method.
  double next_normal();

  /// Chi-square with integer degrees of freedom (sum of squared normals).
  double next_chi_square(int df);

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nmwl
