#include "sparselut/math/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace sparselut {

AdamW::AdamW(Eigen::Index rows, Eigen::Index cols, AdamWConfig config)
    : config_(config), m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)) {}

void AdamW::advance(const Eigen::Ref<const Matrix>& grads) {
  if (grads.rows() != m_.rows() || grads.cols() != m_.cols()) {
    throw std::invalid_argument("optimizer: gradient shape does not match parameter shape");
  }
  ++step_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grads;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grads.cwiseProduct(grads);
}

Matrix AdamW::direction(const Eigen::Ref<const Matrix>& grads) {
  advance(grads);
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  Matrix dir(m_.rows(), m_.cols());
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      dir(i, j) = (m_(i, j) / c1) / (std::sqrt(v_(i, j) / c2) + config_.epsilon);
    }
  }
  return dir;
}

void AdamW::update(Eigen::Ref<Matrix> params, const Eigen::Ref<const Matrix>& grads) {
  if (params.rows() != m_.rows() || params.cols() != m_.cols()) {
    throw std::invalid_argument("optimizer: parameter shape does not match state");
  }
  const Matrix dir = direction(grads);
  const double decay = 1.0 - config_.learning_rate * config_.weight_decay;
  params = params * decay - config_.learning_rate * dir;
}

void AdamW::reset_where_not(const BoolMatrix& keep) {
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      if (!keep(i, j)) {
        m_(i, j) = 0.0;
        v_(i, j) = 0.0;
      }
    }
  }
}

}  // namespace sparselut
