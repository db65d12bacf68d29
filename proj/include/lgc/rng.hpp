#pragma once

#include <cstdint>

namespace lgc {

// Counter-based generator: output k of stream s under seed is
// splitmix64_mix(key(seed, s) + k * 0x9E3779B97F4A7C15). Uniforms take the top
// 53 bits; normals use the Box-Muller cosine branch on two fresh uniforms.
// Every step is specified bit-for-bit so sequences reproduce across platforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace lgc
