#pragma once

#include <cstdint>

namespace sparselut {

/// Uniform quantizer with 2^bits levels on [lo, hi). Level k has the value
/// lo + k * (hi - lo) / 2^bits; inputs outside the range clamp to the end levels.
struct QuantizerSpec {
  int bits = 2;
  double lo = 0.0;
  double hi = 1.0;

  std::uint32_t levels() const { return std::uint32_t{1} << bits; }
  double step() const { return (hi - lo) / static_cast<double>(levels()); }

  /// Throws std::invalid_argument unless 1 <= bits <= 16 and lo < hi.
  void validate() const;

  friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;
};

/// Level index of x: the largest k whose level value is <= x, clamped to
/// [0, 2^bits - 1]. Ties at level boundaries resolve downward (floor).
std::uint32_t quantize_code(double x, const QuantizerSpec& q);

double level_value(std::uint32_t code, const QuantizerSpec& q);

inline double quantize(double x, const QuantizerSpec& q) {
  return level_value(quantize_code(x, q), q);
}

/// Clipped straight-through estimator: passes `upstream` when lo <= x <= hi.
inline double quantize_grad(double upstream, double x, const QuantizerSpec& q) {
  return (x >= q.lo && x <= q.hi) ? upstream : 0.0;
}

}  // namespace sparselut
