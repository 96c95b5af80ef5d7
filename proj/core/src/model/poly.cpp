#include "sparselut/model/neuron.hpp"

#include <stdexcept>
#include <string>

namespace sparselut {

int poly_feature_count(int fanin, int degree) {
  if (fanin < 0) throw std::invalid_argument("poly_feature_count: negative fan-in");
  switch (degree) {
    case 1: return fanin + 1;
    case 2: return (fanin + 1) * (fanin + 2) / 2;
    default: throw std::invalid_argument("unsupported polynomial degree " + std::to_string(degree));
  }
}

void poly_features_into(std::span<const double> x, int degree, std::span<double> out) {
  const int f = static_cast<int>(x.size());
  if (static_cast<int>(out.size()) != poly_feature_count(f, degree)) {
    throw std::invalid_argument("poly_features: output span has the wrong length");
  }
  std::size_t m = 0;
  out[m++] = 1.0;
  for (int i = 0; i < f; ++i) out[m++] = x[static_cast<std::size_t>(i)];
  if (degree == 2) {
    for (int i = 0; i < f; ++i) {
      for (int j = i; j < f; ++j) out[m++] = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
    }
  }
}

std::vector<double> poly_features(std::span<const double> x, int degree) {
  std::vector<double> out(static_cast<std::size_t>(poly_feature_count(static_cast<int>(x.size()), degree)));
  poly_features_into(x, degree, out);
  return out;
}

double neuron_preactivation(std::span<const double> x, std::span<const double> weights, double bias,
                            int degree) {
  const std::size_t f = x.size();
  const auto expected = static_cast<std::size_t>(poly_feature_count(static_cast<int>(f), degree));
  if (weights.size() != expected) {
    throw std::invalid_argument("neuron_forward: expected " + std::to_string(expected) +
                                " weights, got " + std::to_string(weights.size()));
  }
  // Same monomial order and rounding as poly_features followed by a dot product.
  double acc = 0.0;
  acc += weights[0] * 1.0;
  std::size_t m = 1;
  for (std::size_t i = 0; i < f; ++i) acc += weights[m++] * x[i];
  if (degree == 2) {
    for (std::size_t i = 0; i < f; ++i) {
      for (std::size_t j = i; j < f; ++j) acc += weights[m++] * (x[i] * x[j]);
    }
  }
  return acc + bias;
}

double neuron_forward(std::span<const double> x, std::span<const double> weights, double bias,
                      int degree, Activation act, const std::optional<QuantizerSpec>& out_q) {
  const double y = activate(neuron_preactivation(x, weights, bias, degree), act);
  return out_q ? quantize(y, *out_q) : y;
}

}  // namespace sparselut
