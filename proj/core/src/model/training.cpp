#include "sparselut/model/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sparselut/math/optimizer.hpp"
#include "sparselut/model/mask_search_net.hpp"
#include "sparselut/sparsity/rewiring.hpp"

namespace sparselut {

namespace {

// Stream ids so every stage draws from its own reproducible sequence.
constexpr std::uint64_t kMaskStream = 1;
constexpr std::uint64_t kMaskShuffleStream = 2;
constexpr std::uint64_t kRetrainInitStream = 3;
constexpr std::uint64_t kRetrainShuffleStream = 4;

void check_dataset(const ModelConfig& config, const Dataset& data, std::string_view what) {
  if (data.empty()) throw std::invalid_argument(std::string(what) + ": dataset is empty");
  if (data.dims() != config.input_dim()) {
    throw std::invalid_argument(std::string(what) + ": dataset has " + std::to_string(data.dims()) +
                                " features, model expects " + std::to_string(config.input_dim()));
  }
  if (data.num_classes > config.num_classes()) {
    throw std::invalid_argument(std::string(what) + ": dataset has more classes than model outputs");
  }
}

template <typename Dst>
void gather_rows(const Dataset& data, std::span<const Eigen::Index> idx, Dst& batch,
                 std::vector<int>& labels) {
  batch.resize(static_cast<Eigen::Index>(idx.size()), data.dims());
  labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    batch.row(static_cast<Eigen::Index>(r)) = data.features.row(idx[r]);
    labels[r] = data.labels[static_cast<std::size_t>(idx[r])];
  }
}

std::int64_t steps_per_epoch(Eigen::Index samples, int batch_size) {
  return (samples + batch_size - 1) / batch_size;
}

double mask_density(const FeatureMask& mask) {
  double active = 0.0;
  double total = 0.0;
  for (const auto& l : mask.layers) {
    active += l.total_connections();
    total += static_cast<double>(l.n_in) * l.n_out;
  }
  return active / total;
}

}  // namespace

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  }
  return idx;
}

MaskDerivation derive_mask(const ModelConfig& config, const Dataset& train, const EpochCallback& on_epoch) {
  config.validate();
  Rng root(config.seed);
  MaskDerivation out;

  if (config.mode == SparsityMode::random || config.mode == SparsityMode::dense) {
    Rng rng = root.fork(kMaskStream);
    for (const auto& spec : config.layers) {
      out.mask.layers.push_back(config.mode == SparsityMode::dense
                                    ? full_mask(spec.n_in, spec.n_out)
                                    : init_random_mask(spec.n_in, spec.n_out, spec.fanin, rng));
    }
    out.density_per_epoch.assign(static_cast<std::size_t>(config.training.mask_epochs),
                                 mask_density(out.mask));
    return out;
  }

  check_dataset(config, train, "derive_mask");
  const auto& t = config.training;
  const std::int64_t spe = steps_per_epoch(train.size(), t.batch_size);
  const RewiringSchedule sched = config.schedule(spe);
  sched.validate();

  Rng rng = root.fork(kMaskStream);
  Rng shuffle_rng = root.fork(kMaskShuffleStream);
  const bool deepr = config.mode == SparsityMode::deepr_star;
  const bool adam = t.theta_update == ThetaUpdate::adam;
  // DeepR* starts sparse at the target fan-in; SparseLUT starts from
  // `initial_fanin` connections per neuron (dense by default).
  MaskSearchNet net = MaskSearchNet::initialize(config, deepr ? -1 : t.initial_fanin, rng);

  std::vector<AdamW> theta_opt;
  std::vector<AdamW> bias_opt;
  const AdamWConfig theta_cfg{t.mask_learning_rate, 0.9, 0.999, 1e-8, 0.0};
  const AdamWConfig bias_cfg{t.mask_learning_rate, 0.9, 0.999, 1e-8, t.weight_decay};
  for (const auto& c : net.connections) {
    theta_opt.emplace_back(c.n_in(), c.n_out(), theta_cfg);
    bias_opt.emplace_back(c.n_out(), 1, bias_cfg);
  }

  Matrix batch;
  std::vector<int> labels;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < t.mask_epochs; ++epoch) {
    const auto order = shuffled_indices(train.size(), shuffle_rng);
    double loss_sum = 0.0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(t.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(t.batch_size));
      gather_rows(train, std::span(order).subspan(start, stop - start), batch, labels);
      const DenseGradients g = net.backward(batch, labels);
      loss_sum += g.loss;
      ++batches;
      for (std::size_t l = 0; l < net.connections.size(); ++l) {
        ConnectionState& conn = net.connections[l];
        Matrix direction = theta_gradient(conn, g.weights[l]);
        if (adam) direction = theta_opt[l].direction(direction);
        if (deepr) {
          deepr_star_step(conn, direction, sched, rng);
        } else {
          sparselut_step(conn, direction, sched, step, rng);
        }
        if (adam) {
          // regrown connections restart with fresh moments
          theta_opt[l].reset_where_not(conn.active);
          bias_opt[l].update(net.biases[l], g.bias[l]);
        } else {
          net.biases[l] -= t.mask_learning_rate * g.bias[l];
        }
      }
      ++step;
    }
    out.loss_per_epoch.push_back(loss_sum / static_cast<double>(batches));
    out.density_per_epoch.push_back(net.density());
    if (on_epoch) on_epoch({"derive", epoch, out.loss_per_epoch.back(), out.density_per_epoch.back(), -1.0});
  }

  for (const auto& c : net.connections) out.mask.layers.push_back(extract_mask(c));
  return out;
}

RetrainResult retrain(const ModelConfig& config, const FeatureMask& mask, const Dataset& train,
                      const Dataset* test, const EpochCallback& on_epoch) {
  config.validate();
  Rng root(config.seed);
  Rng init_rng = root.fork(kRetrainInitStream);
  Rng shuffle_rng = root.fork(kRetrainShuffleStream);
  RetrainResult out;
  out.model = TrainedModel::initialize(config, mask, init_rng);
  const auto& t = config.training;
  if (t.retrain_epochs == 0) return out;
  check_dataset(config, train, "retrain");

  TrainedModel& model = out.model;
  std::vector<AdamW> coeff_opt;
  std::vector<AdamW> bias_opt;
  const AdamWConfig opt_cfg{t.retrain_learning_rate, 0.9, 0.999, 1e-8, t.weight_decay};
  for (const auto& layer : model.layers) {
    coeff_opt.emplace_back(layer.coeffs.rows(), layer.coeffs.cols(), opt_cfg);
    bias_opt.emplace_back(layer.spec.n_out, 1, opt_cfg);
  }

  TrainedModel best = model;
  RowMatrix batch;
  std::vector<int> labels;
  for (int epoch = 0; epoch < t.retrain_epochs; ++epoch) {
    const auto order = shuffled_indices(train.size(), shuffle_rng);
    double loss_sum = 0.0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(t.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(t.batch_size));
      gather_rows(train, std::span(order).subspan(start, stop - start), batch, labels);
      const LutGradients g = model.backward(batch, labels, true);
      loss_sum += g.loss;
      ++batches;
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        // RowMatrix parameters go through a column-major copy for the optimizer.
        Matrix coeffs = model.layers[l].coeffs;
        coeff_opt[l].update(coeffs, Matrix(g.coeffs[l]));
        model.layers[l].coeffs = coeffs;
        bias_opt[l].update(model.layers[l].bias, g.bias[l]);
      }
    }
    out.loss_per_epoch.push_back(loss_sum / static_cast<double>(batches));
    double acc = -1.0;
    if (test != nullptr) {
      acc = evaluate(model, *test);
      out.test_accuracy_per_epoch.push_back(acc);
      if (acc > out.best_accuracy) {
        out.best_accuracy = acc;
        out.best_epoch = epoch;
        best = model;
      }
    }
    if (on_epoch) on_epoch({"retrain", epoch, out.loss_per_epoch.back(), 0.0, acc});
  }
  if (test != nullptr) {
    out.model = std::move(best);
  } else {
    out.best_epoch = t.retrain_epochs - 1;
  }
  return out;
}

double evaluate(const TrainedModel& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: dataset is empty");
  constexpr Eigen::Index kChunk = 512;
  std::int64_t correct = 0;
  for (Eigen::Index start = 0; start < data.size(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, data.size() - start);
    const RowMatrix logits = model.forward(data.features.middleRows(start, n), true);
    for (Eigen::Index r = 0; r < n; ++r) {
      Eigen::Index arg = 0;
      logits.row(r).maxCoeff(&arg);
      if (arg == data.labels[static_cast<std::size_t>(start + r)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace sparselut
