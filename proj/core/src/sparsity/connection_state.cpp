#include "sparselut/sparsity/connection_state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sparselut/errors.hpp"

namespace sparselut {

ConnectionState init_connection_state(int n_in, int n_out, int initial_fanin, int target_fanin,
                                      Rng& rng, double gain) {
  if (target_fanin < 1 || target_fanin > n_in) {
    throw std::invalid_argument("init_connection_state: target fan-in outside [1, n_in]");
  }
  if (!(gain > 0.0)) throw std::invalid_argument("init_connection_state: gain must be positive");
  const Matrix w0 = standard_normal_matrix(n_in, n_out, rng);
  const LayerMask is_con = init_random_mask(n_in, n_out, initial_fanin, rng);

  ConnectionState state;
  state.target_fanin = target_fanin;
  state.initial_fanin = initial_fanin;
  state.theta = Matrix::Zero(n_in, n_out);
  state.sign.resize(n_in, n_out);
  for (int i = 0; i < n_in; ++i) {
    for (int j = 0; j < n_out; ++j) state.sign(i, j) = rng.coin() ? 1.0 : -1.0;
  }
  for (int j = 0; j < n_out; ++j) {
    for (int i = 0; i < n_in; ++i) {
      if (is_con.bits(i, j)) state.theta(i, j) = gain * std::abs(w0(i, j));
    }
  }
  state.active = state.theta.array() > 0.0;
  return state;
}

Matrix effective_weights(const ConnectionState& state) {
  return (state.theta.array() > 0.0).select(state.theta.cwiseProduct(state.sign), 0.0);
}

LayerMask extract_mask(const ConnectionState& state) {
  LayerMask mask(state.n_in(), state.n_out(), state.target_fanin);
  mask.bits = state.theta.array() > 0.0;
  for (int j = 0; j < mask.n_out; ++j) {
    const int count = mask.column_count(j);
    if (count != state.target_fanin) {
      throw InvalidState("extract_mask: neuron " + std::to_string(j) + " has " +
                         std::to_string(count) + " active connections, expected " +
                         std::to_string(state.target_fanin));
    }
  }
  return mask;
}

}  // namespace sparselut
