#pragma once

#include <cstdint>

#include "sparselut/math/types.hpp"

namespace sparselut {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

/// Adaptive-moment optimizer state for one parameter tensor, with decoupled
/// (multiplicative) weight decay applied before the moment step.
class AdamW {
 public:
  AdamW(Eigen::Index rows, Eigen::Index cols, AdamWConfig config = {});

  const AdamWConfig& config() const { return config_; }
  std::int64_t step_count() const { return step_; }
  const Matrix& first_moment() const { return m_; }
  const Matrix& second_moment() const { return v_; }

  /// params <- params * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps).
  void update(Eigen::Ref<Matrix> params, const Eigen::Ref<const Matrix>& grads);

  /// Advances the moments with `grads` and returns m_hat / (sqrt(v_hat) + eps)
  /// without touching any parameter. Used to precondition the connection
  /// parameter step of the rewiring rule.
  Matrix direction(const Eigen::Ref<const Matrix>& grads);

  /// Zero the moments wherever keep(i, j) is false.
  void reset_where_not(const BoolMatrix& keep);

 private:
  void advance(const Eigen::Ref<const Matrix>& grads);

  AdamWConfig config_;
  Matrix m_;
  Matrix v_;
  std::int64_t step_ = 0;
};

/// Free-function form of AdamW::update.
inline void optimizer_update(Eigen::Ref<Matrix> params, const Eigen::Ref<const Matrix>& grads,
                             AdamW& state) {
  state.update(params, grads);
}

}  // namespace sparselut
