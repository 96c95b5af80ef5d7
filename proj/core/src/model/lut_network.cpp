#include "sparselut/model/lut_network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sparselut/model/neuron.hpp"

namespace sparselut {

namespace {

void gather(const RowMatrix& x, Eigen::Index row, const std::vector<int>& idx, std::vector<double>& out) {
  out.resize(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = x(row, idx[k]);
}

bool in_unit(double z) { return z >= 0.0 && z <= 1.0; }

}  // namespace

LayerMask LutLayer::mask() const {
  LayerMask m(spec.n_in, spec.n_out, spec.fanin);
  for (int j = 0; j < spec.n_out; ++j) {
    for (int i : inputs[static_cast<std::size_t>(j)]) m.bits(i, j) = true;
  }
  return m;
}

Matrix LutLayer::linear_weights() const {
  Matrix w = Matrix::Zero(spec.n_in, spec.n_out);
  for (int j = 0; j < spec.n_out; ++j) {
    const auto& in = inputs[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < in.size(); ++k) w(in[k], j) = coeffs(j, static_cast<Eigen::Index>(k + 1));
  }
  return w;
}

TrainedModel TrainedModel::initialize(const ModelConfig& config, const FeatureMask& mask, Rng& rng) {
  config.validate();
  if (mask.layers.size() != config.layers.size()) {
    throw std::invalid_argument("mask has " + std::to_string(mask.layers.size()) +
                                " layers, config has " + std::to_string(config.layers.size()));
  }
  TrainedModel model;
  model.input_bits = config.input_bits;
  QuantizerSpec in_q = config.input_quantizer();
  for (std::size_t l = 0; l < config.layers.size(); ++l) {
    const LayerSpec& spec = config.layers[l];
    const LayerMask& lm = mask.layers[l];
    if (lm.n_in != spec.n_in || lm.n_out != spec.n_out) {
      throw std::invalid_argument("mask layer " + std::to_string(l) + " is " + std::to_string(lm.n_in) +
                                  "x" + std::to_string(lm.n_out) + ", config expects " +
                                  std::to_string(spec.n_in) + "x" + std::to_string(spec.n_out));
    }
    LutLayer layer;
    layer.spec = spec;
    layer.in_q = in_q;
    layer.out_q = QuantizerSpec{spec.act_bits, 0.0, 1.0};
    for (int j = 0; j < spec.n_out; ++j) {
      auto idx = lm.inputs(j);
      if (static_cast<int>(idx.size()) != spec.fanin) {
        throw std::invalid_argument("mask layer " + std::to_string(l) + " neuron " + std::to_string(j) +
                                    " has fan-in " + std::to_string(idx.size()) + ", config expects " +
                                    std::to_string(spec.fanin));
      }
      layer.inputs.push_back(std::move(idx));
    }
    const int terms = poly_feature_count(spec.fanin, spec.degree);
    const double scale = 1.0 / std::sqrt(static_cast<double>(terms));
    layer.coeffs.resize(spec.n_out, terms);
    for (int j = 0; j < spec.n_out; ++j) {
      for (int m = 0; m < terms; ++m) layer.coeffs(j, m) = scale * rng.normal();
    }
    layer.bias = Vector::Zero(spec.n_out);
    in_q = layer.out_q;
    model.layers.push_back(std::move(layer));
  }
  return model;
}

FeatureMask TrainedModel::mask() const {
  FeatureMask m;
  for (const auto& layer : layers) m.layers.push_back(layer.mask());
  return m;
}

RowMatrix TrainedModel::forward(const RowMatrix& batch, bool quantized) const {
  if (batch.cols() != input_dim()) {
    throw std::invalid_argument("forward: batch has " + std::to_string(batch.cols()) +
                                " features, model expects " + std::to_string(input_dim()));
  }
  RowMatrix x = batch;
  if (quantized) {
    const QuantizerSpec q = layers.front().in_q;
    x = x.unaryExpr([&](double v) { return quantize(v, q); });
  }
  std::vector<double> sel;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LutLayer& layer = layers[l];
    RowMatrix z(x.rows(), layer.spec.n_out);
    for (Eigen::Index b = 0; b < x.rows(); ++b) {
      for (int j = 0; j < layer.spec.n_out; ++j) {
        gather(x, b, layer.inputs[static_cast<std::size_t>(j)], sel);
        z(b, j) = neuron_preactivation(sel, layer.weights(j), layer.bias(j), layer.spec.degree);
      }
    }
    if (l + 1 == layers.size()) return z;
    const QuantizerSpec q = layer.out_q;
    x = z.unaryExpr([&](double v) {
      const double a = clipped_relu(v);
      return quantized ? quantize(a, q) : a;
    });
  }
  return x;
}

double softmax_cross_entropy(const RowMatrix& logits, std::span<const int> labels, RowMatrix* grad) {
  const Eigen::Index batch = logits.rows();
  if (static_cast<Eigen::Index>(labels.size()) != batch) {
    throw std::invalid_argument("softmax_cross_entropy: label count does not match batch");
  }
  if (grad) grad->resize(batch, logits.cols());
  double loss = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= logits.cols()) throw std::invalid_argument("label out of range");
    const double mx = logits.row(b).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) sum += std::exp(logits(b, c) - mx);
    const double log_z = mx + std::log(sum);
    loss += log_z - logits(b, y);
    if (grad) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        (*grad)(b, c) = (std::exp(logits(b, c) - log_z) - (c == y ? 1.0 : 0.0)) / static_cast<double>(batch);
      }
    }
  }
  return loss / static_cast<double>(batch);
}

LutGradients TrainedModel::backward(const RowMatrix& batch, std::span<const int> labels,
                                    bool quantized) const {
  if (batch.cols() != input_dim()) throw std::invalid_argument("backward: batch width mismatch");
  if (static_cast<Eigen::Index>(labels.size()) != batch.rows()) {
    throw std::invalid_argument("backward: label count does not match batch");
  }
  const std::size_t n_layers = layers.size();
  std::vector<RowMatrix> xs(n_layers);  // input of each layer
  std::vector<RowMatrix> zs(n_layers);  // pre-activation of each layer
  xs[0] = batch;
  if (quantized) {
    const QuantizerSpec q = layers.front().in_q;
    xs[0] = xs[0].unaryExpr([&](double v) { return quantize(v, q); });
  }
  std::vector<double> sel;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const LutLayer& layer = layers[l];
    zs[l].resize(batch.rows(), layer.spec.n_out);
    for (Eigen::Index b = 0; b < batch.rows(); ++b) {
      for (int j = 0; j < layer.spec.n_out; ++j) {
        gather(xs[l], b, layer.inputs[static_cast<std::size_t>(j)], sel);
        zs[l](b, j) = neuron_preactivation(sel, layer.weights(j), layer.bias(j), layer.spec.degree);
      }
    }
    if (l + 1 < n_layers) {
      const QuantizerSpec q = layer.out_q;
      xs[l + 1] = zs[l].unaryExpr([&](double v) {
        const double a = clipped_relu(v);
        return quantized ? quantize(a, q) : a;
      });
    }
  }

  LutGradients grads;
  grads.coeffs.resize(n_layers);
  grads.bias.resize(n_layers);
  RowMatrix dz;
  grads.loss = softmax_cross_entropy(zs.back(), labels, &dz);

  for (std::size_t l = n_layers; l-- > 0;) {
    const LutLayer& layer = layers[l];
    const int degree = layer.spec.degree;
    RowMatrix& gc = grads.coeffs[l];
    gc = RowMatrix::Zero(layer.coeffs.rows(), layer.coeffs.cols());
    grads.bias[l] = Vector::Zero(layer.spec.n_out);
    RowMatrix dx;
    if (l > 0) dx = RowMatrix::Zero(batch.rows(), layer.spec.n_in);
    for (Eigen::Index b = 0; b < batch.rows(); ++b) {
      for (int j = 0; j < layer.spec.n_out; ++j) {
        const double g = dz(b, j);
        if (g == 0.0) continue;
        const auto& in = layer.inputs[static_cast<std::size_t>(j)];
        gather(xs[l], b, in, sel);
        const auto w = layer.weights(j);
        grads.bias[l](j) += g;
        gc(j, 0) += g;
        Eigen::Index m = 1;
        for (std::size_t i = 0; i < sel.size(); ++i, ++m) {
          gc(j, m) += g * sel[i];
          if (l > 0) dx(b, in[i]) += g * w[static_cast<std::size_t>(m)];
        }
        if (degree == 2) {
          for (std::size_t i = 0; i < sel.size(); ++i) {
            for (std::size_t k = i; k < sel.size(); ++k, ++m) {
              gc(j, m) += g * sel[i] * sel[k];
              if (l == 0) continue;
              const double gw = g * w[static_cast<std::size_t>(m)];
              if (i == k) {
                dx(b, in[i]) += 2.0 * gw * sel[i];
              } else {
                dx(b, in[i]) += gw * sel[k];
                dx(b, in[k]) += gw * sel[i];
              }
            }
          }
        }
      }
    }
    if (l > 0) {
      // straight-through quantizer, clipped-ReLU derivative on [0, 1]
      const RowMatrix& zp = zs[l - 1];
      dz = RowMatrix(dx.rows(), dx.cols());
      for (Eigen::Index b = 0; b < dx.rows(); ++b) {
        for (Eigen::Index i = 0; i < dx.cols(); ++i) dz(b, i) = in_unit(zp(b, i)) ? dx(b, i) : 0.0;
      }
    }
  }
  return grads;
}

std::uint32_t TrainedModel::neuron_code(int layer, int neuron, std::span<const double> selected) const {
  const LutLayer& ly = layers.at(static_cast<std::size_t>(layer));
  const double y = neuron_forward(selected, ly.weights(neuron), ly.bias(neuron), ly.spec.degree,
                                  Activation::clipped_relu, ly.out_q);
  return quantize_code(y, ly.out_q);
}

std::vector<std::uint32_t> TrainedModel::infer_codes_from_codes(
    std::span<const std::uint32_t> input_codes) const {
  if (static_cast<int>(input_codes.size()) != input_dim()) {
    throw std::invalid_argument("infer_codes: wrong input width");
  }
  std::vector<std::uint32_t> codes(input_codes.begin(), input_codes.end());
  std::vector<double> sel;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LutLayer& ly = layers[l];
    std::vector<std::uint32_t> next(static_cast<std::size_t>(ly.spec.n_out));
    for (int j = 0; j < ly.spec.n_out; ++j) {
      const auto& in = ly.inputs[static_cast<std::size_t>(j)];
      sel.resize(in.size());
      for (std::size_t k = 0; k < in.size(); ++k) {
        sel[k] = level_value(codes[static_cast<std::size_t>(in[k])], ly.in_q);
      }
      next[static_cast<std::size_t>(j)] = neuron_code(static_cast<int>(l), j, sel);
    }
    codes = std::move(next);
  }
  return codes;
}

std::vector<std::uint32_t> TrainedModel::infer_codes(std::span<const double> sample) const {
  std::vector<std::uint32_t> in(sample.size());
  const QuantizerSpec q = layers.front().in_q;
  std::transform(sample.begin(), sample.end(), in.begin(), [&](double v) { return quantize_code(v, q); });
  return infer_codes_from_codes(in);
}

}  // namespace sparselut
