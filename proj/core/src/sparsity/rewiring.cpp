#include "sparselut/sparsity/rewiring.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparselut/errors.hpp"

namespace sparselut {

namespace {

void check_neuron(const ConnectionState& state, int neuron) {
  if (neuron < 0 || neuron >= state.n_out()) {
    throw std::invalid_argument("neuron index " + std::to_string(neuron) + " out of range");
  }
}

// The k active inputs of `neuron` that come first under (theta, index) order.
std::vector<int> lowest_active(const ConnectionState& state, int neuron, int k) {
  std::vector<int> candidates;
  candidates.reserve(static_cast<std::size_t>(state.active_count(neuron)));
  for (int i = 0; i < state.n_in(); ++i) {
    if (state.active(i, neuron)) candidates.push_back(i);
  }
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), candidates.size());
  const auto col = state.theta.col(neuron);
  auto less = [&](int a, int b) { return col(a) < col(b) || (col(a) == col(b) && a < b); };
  // (theta, index) is a strict total order, so the selected set is unique.
  if (n < candidates.size()) {
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                     candidates.end(), less);
  }
  candidates.resize(n);
  return candidates;
}

}  // namespace

void RewiringSchedule::validate() const {
  if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be >= 1");
  if (phase_boundary < 1 || phase_boundary > total_steps) {
    throw std::invalid_argument("schedule: phase boundary must satisfy 0 < T <= total_steps");
  }
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw std::invalid_argument("schedule: eps1, eps2 must be > 0");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("schedule: noise_std must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("schedule: learning rate must be > 0");
}

void apply_stochastic_update(ConnectionState& state, const Matrix& dE_dtheta,
                             const RewiringSchedule& sched, Rng& rng) {
  if (dE_dtheta.rows() != state.theta.rows() || dE_dtheta.cols() != state.theta.cols()) {
    throw std::invalid_argument("apply_stochastic_update: gradient shape mismatch");
  }
  const double eta = sched.learning_rate;
  const double decay = eta * sched.reg_coeff;
  for (Eigen::Index j = 0; j < state.theta.cols(); ++j) {
    for (Eigen::Index i = 0; i < state.theta.rows(); ++i) {
      if (!state.active(i, j)) continue;
      double& th = state.theta(i, j);
      th -= eta * dE_dtheta(i, j);
      th -= decay;
      if (sched.noise_std > 0.0) th += eta * sched.noise_std * rng.normal();
      if (!(th > 0.0)) state.active(i, j) = false;
    }
  }
}

int residual(const ConnectionState& state, int neuron, int target_fanin) {
  check_neuron(state, neuron);
  return state.active_count(neuron) - target_fanin;
}

void regrow(ConnectionState& state, int neuron, int k, double eps1, Rng& rng) {
  check_neuron(state, neuron);
  if (k <= 0) return;
  std::vector<int> dormant;
  for (int i = 0; i < state.n_in(); ++i) {
    if (!state.active(i, neuron)) dormant.push_back(i);
  }
  if (static_cast<std::size_t>(k) > dormant.size()) {
    throw InvalidState("regrow: neuron " + std::to_string(neuron) + " has " +
                       std::to_string(dormant.size()) + " inactive connections, " +
                       std::to_string(k) + " requested");
  }
  for (int s = 0; s < k; ++s) {
    const auto pick = static_cast<std::size_t>(s) +
                      rng.uniform_index(dormant.size() - static_cast<std::size_t>(s));
    std::swap(dormant[static_cast<std::size_t>(s)], dormant[pick]);
    const int i = dormant[static_cast<std::size_t>(s)];
    state.theta(i, neuron) = eps1;
    state.active(i, neuron) = true;
  }
}

void penalize(ConnectionState& state, int neuron, int k, double eps2) {
  check_neuron(state, neuron);
  for (int i : lowest_active(state, neuron, k)) {
    double& th = state.theta(i, neuron);
    th -= eps2;
    if (!(th > 0.0)) state.active(i, neuron) = false;
  }
}

void hard_deactivate(ConnectionState& state, int neuron, int k) {
  check_neuron(state, neuron);
  for (int i : lowest_active(state, neuron, k)) {
    state.theta(i, neuron) = 0.0;
    state.active(i, neuron) = false;
  }
}

void sparselut_step(ConnectionState& state, const Matrix& dE_dtheta, const RewiringSchedule& sched,
                    std::int64_t t, Rng& rng) {
  apply_stochastic_update(state, dE_dtheta, sched, rng);
  const int target = state.target_fanin;
  for (int j = 0; j < state.n_out(); ++j) {
    const int r = residual(state, j, target);
    if (r < 0) {
      regrow(state, j, -r, sched.eps1, rng);
    } else if (r > 0) {
      if (t < sched.phase_boundary) {
        penalize(state, j, r, sched.eps2);
      } else {
        hard_deactivate(state, j, r);
      }
    }
  }
}

void deepr_star_step(ConnectionState& state, const Matrix& dE_dtheta,
                     const RewiringSchedule& sched, Rng& rng) {
  for (int j = 0; j < state.n_out(); ++j) {
    if (state.active_count(j) != state.target_fanin) {
      throw InvalidState("deepr_star_step: neuron " + std::to_string(j) +
                         " does not hold exactly the target fan-in");
    }
  }
  apply_stochastic_update(state, dE_dtheta, sched, rng);
  for (int j = 0; j < state.n_out(); ++j) {
    const int dropped = state.target_fanin - state.active_count(j);
    regrow(state, j, dropped, sched.eps1, rng);
  }
}

}  // namespace sparselut
