#include "sparselut/model/mask_search_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sparselut/model/lut_network.hpp"
#include "sparselut/model/neuron.hpp"

namespace sparselut {

MaskSearchNet MaskSearchNet::initialize(const ModelConfig& config, int initial_fanin, Rng& rng) {
  MaskSearchNet net;
  for (const auto& spec : config.layers) {
    const int fi = initial_fanin < 0    ? spec.fanin
                   : initial_fanin == 0 ? spec.n_in
                                        : std::min(initial_fanin, spec.n_in);
    const double gain = 1.0 / std::sqrt(static_cast<double>(fi));
    net.connections.push_back(init_connection_state(spec.n_in, spec.n_out, fi, spec.fanin, rng, gain));
    net.biases.push_back(Vector::Zero(spec.n_out));
  }
  // Hidden units start mid-range of the clipped ReLU. A unit whose
  // pre-activation starts below zero gets no gradient, and its inputs
  // would be chosen by the initial theta alone.
  for (std::size_t l = 0; l + 1 < net.biases.size(); ++l) net.biases[l].setConstant(0.5);
  return net;
}

Matrix MaskSearchNet::forward(const Matrix& batch) const {
  Matrix h = batch;
  for (std::size_t l = 0; l < connections.size(); ++l) {
    Matrix z = h * effective_weights(connections[l]);
    z.rowwise() += biases[l].transpose();
    if (l + 1 == connections.size()) return z;
    h = z.unaryExpr([](double v) { return clipped_relu(v); });
  }
  return h;
}

DenseGradients MaskSearchNet::backward(const Matrix& batch, std::span<const int> labels) const {
  const std::size_t n_layers = connections.size();
  if (batch.cols() != connections.front().n_in()) {
    throw std::invalid_argument("mask search backward: batch width mismatch");
  }
  std::vector<Matrix> ws(n_layers);
  std::vector<Matrix> hs(n_layers);
  std::vector<Matrix> zs(n_layers);
  hs[0] = batch;
  for (std::size_t l = 0; l < n_layers; ++l) {
    ws[l] = effective_weights(connections[l]);
    zs[l] = hs[l] * ws[l];
    zs[l].rowwise() += biases[l].transpose();
    if (l + 1 < n_layers) hs[l + 1] = zs[l].unaryExpr([](double v) { return clipped_relu(v); });
  }

  DenseGradients grads;
  grads.weights.resize(n_layers);
  grads.bias.resize(n_layers);
  RowMatrix dz_rows;
  grads.loss = softmax_cross_entropy(RowMatrix(zs.back()), labels, &dz_rows);
  Matrix dz = dz_rows;
  for (std::size_t l = n_layers; l-- > 0;) {
    grads.weights[l] = hs[l].transpose() * dz;
    grads.bias[l] = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix dh = dz * ws[l].transpose();
    const Matrix& zp = zs[l - 1];
    dz = (zp.array() >= 0.0 && zp.array() <= 1.0).select(dh, 0.0);
  }
  return grads;
}

double MaskSearchNet::density() const {
  double active = 0.0;
  double total = 0.0;
  for (const auto& c : connections) {
    active += c.total_active();
    total += static_cast<double>(c.theta.size());
  }
  return active / total;
}

Matrix theta_gradient(const ConnectionState& state, const Matrix& dE_dW) {
  if (dE_dW.rows() != state.theta.rows() || dE_dW.cols() != state.theta.cols()) {
    throw std::invalid_argument("theta_gradient: shape mismatch");
  }
  return state.sign.cwiseProduct(dE_dW);
}

}  // namespace sparselut
