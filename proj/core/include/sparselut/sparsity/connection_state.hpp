#pragma once

#include "sparselut/math/rng.hpp"
#include "sparselut/math/types.hpp"
#include "sparselut/sparsity/feature_mask.hpp"

namespace sparselut {

/// Trainable sparsity object for one layer (n_in x n_out, column j = neuron j).
///
/// Each connection carries a magnitude `theta` and a polarity `sign` fixed at
/// construction; the effective weight is theta * sign while theta > 0 and
/// exactly zero otherwise. Between steps, active(i, j) == (theta(i, j) > 0).
struct ConnectionState {
  Matrix theta;
  Matrix sign;  // entries are -1.0 or +1.0
  BoolMatrix active;
  int target_fanin = 0;
  int initial_fanin = 0;

  int n_in() const { return static_cast<int>(theta.rows()); }
  int n_out() const { return static_cast<int>(theta.cols()); }
  int active_count(int neuron) const { return static_cast<int>(active.col(neuron).count()); }
  int total_active() const { return static_cast<int>(active.count()); }
  double density() const {
    return static_cast<double>(total_active()) / static_cast<double>(theta.size());
  }
};

/// Draws W0 ~ N(0,1), a random mask with `initial_fanin` inputs per neuron,
/// and uniform signs; theta = gain * |W0| on the mask, 0 elsewhere.
/// `initial_fanin == n_in` gives a dense start.
ConnectionState init_connection_state(int n_in, int n_out, int initial_fanin, int target_fanin,
                                      Rng& rng, double gain = 1.0);

/// W = theta * sign where theta > 0, exactly 0 elsewhere.
Matrix effective_weights(const ConnectionState& state);

/// Mask of connections with theta > 0. Throws InvalidState unless every
/// neuron holds exactly target_fanin of them.
LayerMask extract_mask(const ConnectionState& state);

}  // namespace sparselut
