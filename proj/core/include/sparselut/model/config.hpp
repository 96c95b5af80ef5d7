#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sparselut/math/quantizer.hpp"
#include "sparselut/sparsity/rewiring.hpp"

namespace sparselut {

enum class SparsityMode { dense, random, deepr_star, sparselut };

/// How the loss gradient enters the theta update during Step 1. `sgd` feeds
/// the raw gradient; `adam` feeds the Adam-preconditioned direction.
enum class ThetaUpdate { sgd, adam };

std::string_view to_string(SparsityMode mode);
/// Accepts "dense", "random", "deepr_star" (or "deepr*"), "sparselut".
SparsityMode parse_sparsity_mode(std::string_view text);

std::string_view to_string(ThetaUpdate update);
ThetaUpdate parse_theta_update(std::string_view text);

struct LayerSpec {
  int n_in = 0;
  int n_out = 0;
  int fanin = 1;
  int act_bits = 2;  // output bit width of every neuron in the layer
  int degree = 1;    // polynomial degree D of the neuron function

  void validate() const;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct TrainingSettings {
  // Step 1: connectivity search (full precision).
  int mask_epochs = 40;
  int phase_boundary_epochs = 32;
  double mask_learning_rate = 0.1;  // step on theta; about 1e-3 suits theta_update = adam
  ThetaUpdate theta_update = ThetaUpdate::sgd;
  double eps1 = 1e-12;
  double eps2 = 5e-5;
  double noise_std = 1e-3;
  double reg_coeff = 1e-5;
  /// Connections per neuron at the start of Step 1. 0 means dense (all n_in).
  int initial_fanin = 0;

  // Step 2: quantized retraining under a frozen mask.
  int retrain_epochs = 60;
  double retrain_learning_rate = 1e-3;

  int batch_size = 64;
  double weight_decay = 1e-4;
};

struct ModelConfig {
  std::vector<LayerSpec> layers;
  int input_bits = 2;
  SparsityMode mode = SparsityMode::sparselut;
  TrainingSettings training;
  std::uint64_t seed = 1;

  int input_dim() const { return layers.empty() ? 0 : layers.front().n_in; }
  int num_classes() const { return layers.empty() ? 0 : layers.back().n_out; }

  /// Checks layer chaining, fan-in bounds, bit widths and schedule constants.
  /// Throws std::invalid_argument.
  void validate() const;

  QuantizerSpec input_quantizer() const { return {input_bits, 0.0, 1.0}; }

  /// Step counts derived from epochs and the number of mini-batches per epoch.
  RewiringSchedule schedule(std::int64_t steps_per_epoch) const;

  /// Chain `widths` (hidden layers then classes) onto `input_dim` with the same
  /// fan-in, bit width and degree everywhere. Fan-in is capped at each n_in.
  static ModelConfig uniform(int input_dim, const std::vector<int>& widths, int fanin, int bits,
                             int degree);
};

/// MNIST HDR topology {256,100,100,100,10}, beta=2, F=6, D=1 at desk scale:
/// 40 search epochs with the phase boundary at 32, 60 retraining epochs.
ModelConfig hdr_desk_preset();

/// HDR with the full schedule: 300 search epochs, T at 240.
ModelConfig hdr_full_preset();

/// JSC-M Lite topology {64,32,5}, beta=3, F=4, 16 input features.
ModelConfig jsc_m_lite_preset();

}  // namespace sparselut
