#pragma once

#include <span>
#include <vector>

#include "sparselut/math/types.hpp"
#include "sparselut/model/config.hpp"
#include "sparselut/sparsity/connection_state.hpp"

namespace sparselut {

struct DenseGradients {
  std::vector<Matrix> weights;  // dE/dW per layer, n_in x n_out
  std::vector<Vector> bias;
  double loss = 0.0;
};

/// Full-precision network whose weights are the effective weights of one
/// ConnectionState per layer (degree-1 neurons, clipped-ReLU hidden layers,
/// linear logits). Used to search the connectivity before retraining.
struct MaskSearchNet {
  std::vector<ConnectionState> connections;
  std::vector<Vector> biases;

  /// Per layer: initial fan-in is `initial_fanin` (0 = dense, negative = the
  /// layer's target fan-in, otherwise capped at n_in),
  /// theta is scaled by 1/sqrt(initial fan-in) so early pre-activations stay
  /// inside the clipped-ReLU's linear range.
  static MaskSearchNet initialize(const ModelConfig& config, int initial_fanin, Rng& rng);

  Matrix forward(const Matrix& batch) const;
  DenseGradients backward(const Matrix& batch, std::span<const int> labels) const;

  double density() const;
};

/// dE/dtheta = sign * dE/dW (W = theta * sign on active connections).
Matrix theta_gradient(const ConnectionState& state, const Matrix& dE_dW);

}  // namespace sparselut
