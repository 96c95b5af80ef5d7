#include "sparselut/math/quantizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sparselut {

void QuantizerSpec::validate() const {
  if (bits < 1 || bits > 16) {
    throw std::invalid_argument("quantizer bits must be in [1, 16], got " + std::to_string(bits));
  }
  if (!(lo < hi)) throw std::invalid_argument("quantizer requires lo < hi");
}

double level_value(std::uint32_t code, const QuantizerSpec& q) {
  return q.lo + static_cast<double>(code) * (q.hi - q.lo) / static_cast<double>(q.levels());
}

std::uint32_t quantize_code(double x, const QuantizerSpec& q) {
  const auto top = static_cast<std::int64_t>(q.levels()) - 1;
  if (!(x > q.lo)) return 0;  // also catches NaN
  const double scaled = (x - q.lo) * static_cast<double>(q.levels()) / (q.hi - q.lo);
  std::int64_t k = scaled >= static_cast<double>(top) ? top : static_cast<std::int64_t>(std::floor(scaled));
  // The division above can land one level off for ranges that are not powers of
  // two; settle on the exact definition max{k : level_value(k) <= x}.
  while (k > 0 && level_value(static_cast<std::uint32_t>(k), q) > x) --k;
  while (k < top && level_value(static_cast<std::uint32_t>(k + 1), q) <= x) ++k;
  return static_cast<std::uint32_t>(k);
}

}  // namespace sparselut
