#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparselut/math/quantizer.hpp"
#include "sparselut/math/rng.hpp"
#include "sparselut/math/types.hpp"
#include "sparselut/model/config.hpp"
#include "sparselut/sparsity/feature_mask.hpp"

namespace sparselut {

/// One layer of fixed-fan-in polynomial neurons. Neuron j reads the inputs
/// listed in inputs[j] (ascending) and has one coefficient per monomial of
/// those inputs (row j of `coeffs`) plus a bias.
struct LutLayer {
  LayerSpec spec;
  std::vector<std::vector<int>> inputs;
  RowMatrix coeffs;  // n_out x poly_feature_count(fanin, degree)
  Vector bias;
  QuantizerSpec in_q;   // quantizer that produced this layer's inputs
  QuantizerSpec out_q;  // quantizer applied to this layer's outputs

  std::span<const double> weights(int neuron) const {
    return {coeffs.row(neuron).data(), static_cast<std::size_t>(coeffs.cols())};
  }
  LayerMask mask() const;
  /// n_in x n_out matrix holding each neuron's degree-1 coefficients at its
  /// input positions, zero elsewhere.
  Matrix linear_weights() const;
};

struct LutGradients {
  std::vector<RowMatrix> coeffs;
  std::vector<Vector> bias;
  double loss = 0.0;  // mean softmax cross-entropy over the batch
};

/// Fixed-connectivity network trained in Step 2 and compiled to truth tables.
///
/// Training semantics: inputs and hidden activations are clipped-ReLU outputs
/// quantized to their layer's levels (when `quantized`), the last layer emits
/// real logits. Hardware semantics (`infer_codes`): every layer, the last
/// included, emits quantizer level codes.
struct TrainedModel {
  int input_bits = 2;
  std::vector<LutLayer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().spec.n_in; }
  int num_classes() const { return layers.empty() ? 0 : layers.back().spec.n_out; }

  /// Fresh weights on a fixed mask. Throws std::invalid_argument when the mask
  /// does not match the configured dimensions and fan-ins.
  static TrainedModel initialize(const ModelConfig& config, const FeatureMask& mask, Rng& rng);

  FeatureMask mask() const;

  RowMatrix forward(const RowMatrix& batch, bool quantized) const;
  LutGradients backward(const RowMatrix& batch, std::span<const int> labels, bool quantized) const;

  /// Output level code of neuron (layer, j) given the real level values of
  /// its selected inputs (in inputs[j] order). Scalar reference path.
  std::uint32_t neuron_code(int layer, int neuron, std::span<const double> selected) const;

  /// Hardware inference from per-input codes of the first layer.
  std::vector<std::uint32_t> infer_codes_from_codes(std::span<const std::uint32_t> input_codes) const;
  /// Hardware inference from real features in [0, 1].
  std::vector<std::uint32_t> infer_codes(std::span<const double> sample) const;
};

/// Mean softmax cross-entropy and its gradient w.r.t. the logits.
double softmax_cross_entropy(const RowMatrix& logits, std::span<const int> labels, RowMatrix* grad);

}  // namespace sparselut
