#include "sparselut/model/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparselut {

std::string_view to_string(SparsityMode mode) {
  switch (mode) {
    case SparsityMode::dense: return "dense";
    case SparsityMode::random: return "random";
    case SparsityMode::deepr_star: return "deepr_star";
    case SparsityMode::sparselut: return "sparselut";
  }
  return "unknown";
}

SparsityMode parse_sparsity_mode(std::string_view text) {
  if (text == "dense") return SparsityMode::dense;
  if (text == "random") return SparsityMode::random;
  if (text == "deepr_star" || text == "deepr*") return SparsityMode::deepr_star;
  if (text == "sparselut") return SparsityMode::sparselut;
  throw std::invalid_argument("unknown sparsity mode '" + std::string(text) + "'");
}

std::string_view to_string(ThetaUpdate update) {
  return update == ThetaUpdate::sgd ? "sgd" : "adam";
}

ThetaUpdate parse_theta_update(std::string_view text) {
  if (text == "sgd") return ThetaUpdate::sgd;
  if (text == "adam") return ThetaUpdate::adam;
  throw std::invalid_argument("unknown theta update '" + std::string(text) + "'");
}

void LayerSpec::validate() const {
  if (n_in < 1 || n_out < 1) throw std::invalid_argument("layer dimensions must be >= 1");
  if (fanin < 1 || fanin > n_in) {
    throw std::invalid_argument("fan-in " + std::to_string(fanin) + " outside [1, " +
                                std::to_string(n_in) + "]");
  }
  if (act_bits < 1 || act_bits > 16) throw std::invalid_argument("act_bits must be in [1, 16]");
  if (degree != 1 && degree != 2) throw std::invalid_argument("only degree 1 and 2 are supported");
}

void ModelConfig::validate() const {
  if (layers.empty()) throw std::invalid_argument("model needs at least one layer");
  if (input_bits < 1 || input_bits > 16) throw std::invalid_argument("input_bits must be in [1, 16]");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    try {
      layers[l].validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": " + e.what());
    }
    if (l > 0 && layers[l].n_in != layers[l - 1].n_out) {
      throw std::invalid_argument("layer " + std::to_string(l) + " input width " +
                                  std::to_string(layers[l].n_in) + " does not match previous output " +
                                  std::to_string(layers[l - 1].n_out));
    }
    if (mode == SparsityMode::dense && layers[l].fanin != layers[l].n_in) {
      throw std::invalid_argument("dense mode requires fan-in = n_in in every layer");
    }
  }
  const auto& t = training;
  if (t.initial_fanin < 0) throw std::invalid_argument("initial_fanin must be >= 0");
  if (t.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (t.mask_epochs < 0 || t.retrain_epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (mode == SparsityMode::sparselut || mode == SparsityMode::deepr_star) {
    if (t.mask_epochs < 1) throw std::invalid_argument("learned masks need mask_epochs >= 1");
    if (t.phase_boundary_epochs < 1 || t.phase_boundary_epochs >= t.mask_epochs) {
      // T = mask_epochs would leave no fine-tuning step, so the fan-in could not be enforced.
      throw std::invalid_argument("phase_boundary_epochs must lie in [1, mask_epochs)");
    }
  }
  if (!(t.eps1 > 0.0) || !(t.eps2 > 0.0)) throw std::invalid_argument("eps1 and eps2 must be > 0");
  if (!(t.noise_std >= 0.0) || !(t.reg_coeff >= 0.0)) {
    throw std::invalid_argument("noise_std and reg_coeff must be >= 0");
  }
  if (!(t.mask_learning_rate > 0.0) || !(t.retrain_learning_rate > 0.0)) {
    throw std::invalid_argument("learning rates must be > 0");
  }
}

RewiringSchedule ModelConfig::schedule(std::int64_t steps_per_epoch) const {
  RewiringSchedule s;
  s.total_steps = std::max<std::int64_t>(1, steps_per_epoch * training.mask_epochs);
  s.phase_boundary = std::clamp<std::int64_t>(steps_per_epoch * training.phase_boundary_epochs, 1,
                                              s.total_steps);
  s.eps1 = training.eps1;
  s.eps2 = training.eps2;
  s.noise_std = training.noise_std;
  s.reg_coeff = training.reg_coeff;
  s.learning_rate = training.mask_learning_rate;
  return s;
}

ModelConfig ModelConfig::uniform(int input_dim, const std::vector<int>& widths, int fanin, int bits,
                                 int degree) {
  ModelConfig cfg;
  cfg.input_bits = bits;
  int n_in = input_dim;
  for (int w : widths) {
    cfg.layers.push_back({n_in, w, std::min(fanin, n_in), bits, degree});
    n_in = w;
  }
  return cfg;
}

ModelConfig hdr_desk_preset() {
  ModelConfig cfg = ModelConfig::uniform(784, {256, 100, 100, 100, 10}, 6, 2, 1);
  cfg.training.mask_epochs = 40;
  cfg.training.phase_boundary_epochs = 32;
  cfg.training.retrain_epochs = 60;
  return cfg;
}

ModelConfig hdr_full_preset() {
  ModelConfig cfg = hdr_desk_preset();
  cfg.training.mask_epochs = 300;
  cfg.training.phase_boundary_epochs = 240;
  return cfg;
}

ModelConfig jsc_m_lite_preset() {
  ModelConfig cfg = ModelConfig::uniform(16, {64, 32, 5}, 4, 3, 1);
  cfg.training.mask_epochs = 40;
  cfg.training.phase_boundary_epochs = 32;
  cfg.training.retrain_epochs = 60;
  return cfg;
}

}  // namespace sparselut
