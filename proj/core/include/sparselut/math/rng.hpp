#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include "sparselut/math/types.hpp"

namespace sparselut {

/// Seeded random stream. All draws are derived from the raw 64-bit output of
/// std::mt19937_64 (whose sequence is fixed by the standard), so replaying a
/// seed reproduces the same draws regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Independent stream keyed by (seed, stream). Does not advance *this.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// SplitMix64 finaliser, used for seed derivation and checksums.
std::uint64_t mix64(std::uint64_t x);

/// rows x cols i.i.d. N(0,1) draws, filled row by row.
Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace sparselut
