#pragma once

#include <cstdint>
#include <random>

#include "tmsnav/geometry.hpp"

namespace tmsnav {

/// Seeded sampler with a fully specified output sequence: std::mt19937_64 is pinned
/// by the standard, and the real-valued mappings below are fixed here rather than
/// left to the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, one value cached).
  double normal();

  /// Uniformly distributed unit vector.
  Vec3 unit_vector();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tmsnav
