#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sparselut/math/quantizer.hpp"

namespace sparselut {

/// Number of monomials of total degree <= `degree` over `fanin` variables,
/// i.e. C(fanin + degree, degree). Supports degree 1 and 2.
int poly_feature_count(int fanin, int degree);

/// Monomial expansion in a fixed order: 1, x_0..x_{F-1}, then (degree 2)
/// x_i * x_j for i <= j in lexicographic order.
/// Throws std::invalid_argument for unsupported degrees.
std::vector<double> poly_features(std::span<const double> x, int degree);
void poly_features_into(std::span<const double> x, int degree, std::span<double> out);

enum class Activation { clipped_relu, identity };

/// min(max(z, 0), 1).
inline double clipped_relu(double z) { return z < 0.0 ? 0.0 : (z > 1.0 ? 1.0 : z); }

inline double activate(double z, Activation act) {
  return act == Activation::clipped_relu ? clipped_relu(z) : z;
}

/// Pre-activation sum_k w_k * phi_k(x) + b, accumulated left to right over the
/// monomials with the bias added last. Truth-table enumeration relies on this order.
double neuron_preactivation(std::span<const double> x, std::span<const double> weights, double bias,
                            int degree);

/// act(preactivation), quantized with `out_q` when given.
double neuron_forward(std::span<const double> x, std::span<const double> weights, double bias,
                      int degree, Activation act,
                      const std::optional<QuantizerSpec>& out_q = std::nullopt);

}  // namespace sparselut
