#pragma once

#include <cstdint>
#include <random>

namespace plsel {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of replication i at sample size n: seed XOR hash(n, i).
std::uint64_t replication_seed(std::uint64_t seed, int n, int replication) noexcept;

/// mt19937_64 with explicit uniform and normal transforms, so a stream is
/// reproducible regardless of the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Marsaglia polar method).
  double normal() noexcept;

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace plsel
