#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "sparselut/harness/dataset.hpp"
#include "sparselut/model/config.hpp"
#include "sparselut/model/lut_network.hpp"
#include "sparselut/sparsity/feature_mask.hpp"

namespace sparselut {

struct EpochLog {
  std::string_view stage;  // "derive" or "retrain"
  int epoch = 0;
  double loss = 0.0;
  double density = 0.0;        // derive only
  double test_accuracy = -1.0;  // retrain with a test split only
};

using EpochCallback = std::function<void(const EpochLog&)>;

struct MaskDerivation {
  FeatureMask mask;
  std::vector<double> density_per_epoch;  // fraction of active connections, all layers
  std::vector<double> loss_per_epoch;     // empty for random/dense masks
};

/// Step 1. random: one init_random_mask per layer, no training. dense: all-ones.
/// sparselut / deepr_star: full-precision training of theta with per-step
/// rewiring, then extract_mask. Deterministic for a fixed config.seed.
MaskDerivation derive_mask(const ModelConfig& config, const Dataset& train,
                           const EpochCallback& on_epoch = {});

struct RetrainResult {
  TrainedModel model;  // weights at the best test epoch (last epoch without a test split)
  std::vector<double> loss_per_epoch;
  std::vector<double> test_accuracy_per_epoch;
  double best_accuracy = -1.0;
  int best_epoch = -1;
};

/// Step 2: fresh weights on the frozen mask, quantized training with AdamW.
/// Throws std::invalid_argument when the mask does not fit the config.
RetrainResult retrain(const ModelConfig& config, const FeatureMask& mask, const Dataset& train,
                      const Dataset* test = nullptr, const EpochCallback& on_epoch = {});

/// Fraction of samples whose quantized-inference argmax equals the label
/// (ties go to the lowest class index). Throws std::invalid_argument if empty.
double evaluate(const TrainedModel& model, const Dataset& data);

/// Index permutation of [0, n) drawn by Fisher-Yates.
std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng);

}  // namespace sparselut
