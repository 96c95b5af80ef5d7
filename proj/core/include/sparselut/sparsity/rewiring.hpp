#pragma once

#include <cstdint>

#include "sparselut/math/rng.hpp"
#include "sparselut/sparsity/connection_state.hpp"

namespace sparselut {

/// Constants of the rewiring procedure. Steps count optimizer steps (mini-batches).
struct RewiringSchedule {
  std::int64_t total_steps = 1;
  std::int64_t phase_boundary = 1;  // first step of the fine-tuning phase
  double eps1 = 1e-12;              // theta given to regrown connections
  double eps2 = 5e-5;               // per-step penalty on surplus connections
  double noise_std = 1e-3;          // G
  double reg_coeff = 1e-5;          // alpha
  double learning_rate = 1e-3;      // eta

  /// Throws std::invalid_argument on 0 < T <= total_steps, eps > 0, G >= 0 violations.
  void validate() const;
};

/// theta_k <- theta_k - eta * dE/dtheta_k - eta * alpha + eta * v_k for every
/// active k, v_k ~ N(0, G^2) drawn fresh per connection; connections whose
/// theta is no longer positive become inactive. Inactive entries are untouched.
void apply_stochastic_update(ConnectionState& state, const Matrix& dE_dtheta,
                             const RewiringSchedule& sched, Rng& rng);

/// Active connections of `neuron` minus `target_fanin`.
int residual(const ConnectionState& state, int neuron, int target_fanin);

/// Activates `k` inactive connections of `neuron`, chosen uniformly without
/// replacement, with theta = eps1. Throws InvalidState if fewer than k exist.
void regrow(ConnectionState& state, int neuron, int k, double eps1, Rng& rng);

/// Subtracts eps2 from the k active connections of `neuron` with the smallest
/// theta (ties: lowest input index); any that reach theta <= 0 deactivate.
void penalize(ConnectionState& state, int neuron, int k, double eps2);

/// Sets theta = 0 and deactivates the k lowest-theta active connections.
void hard_deactivate(ConnectionState& state, int neuron, int k);

/// One full rewiring step at optimizer step t: stochastic update, then per
/// neuron regrow (R < 0), penalize (R > 0, t < T) or hard-deactivate (R > 0, t >= T).
void sparselut_step(ConnectionState& state, const Matrix& dE_dtheta, const RewiringSchedule& sched,
                    std::int64_t t, Rng& rng);

/// Fixed-fan-in Deep Rewiring: stochastic update, then every connection lost
/// to a sign change is replaced in the same neuron by a uniformly drawn
/// inactive one (theta = eps1). Requires exactly target_fanin active per neuron.
void deepr_star_step(ConnectionState& state, const Matrix& dE_dtheta,
                     const RewiringSchedule& sched, Rng& rng);

}  // namespace sparselut
