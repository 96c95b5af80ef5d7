#include <benchmark/benchmark.h>

#include "sparselut/harness/dataset.hpp"
#include "sparselut/lut/truth_table.hpp"
#include "sparselut/model/lut_network.hpp"
#include "sparselut/model/mask_search_net.hpp"
#include "sparselut/sparsity/rewiring.hpp"

using namespace sparselut;

namespace {

TrainedModel random_model(const ModelConfig& cfg, Rng& rng) {
  FeatureMask mask;
  for (const auto& l : cfg.layers) mask.layers.push_back(init_random_mask(l.n_in, l.n_out, l.fanin, rng));
  return TrainedModel::initialize(cfg, mask, rng);
}

// One rewiring step on the first HDR layer (784 x 256), dense start.
void BM_SparseLutStep(benchmark::State& state) {
  Rng rng(1);
  ConnectionState s = init_connection_state(784, 256, 784, 6, rng, 1.0 / 28.0);
  const Matrix g = standard_normal_matrix(784, 256, rng) * 1e-3;
  RewiringSchedule sched;
  sched.total_steps = 1'000'000;
  sched.phase_boundary = 800'000;
  std::int64_t t = 0;
  for (auto _ : state) {
    sparselut_step(s, g, sched, t++, rng);
    benchmark::DoNotOptimize(s.theta.data());
  }
  state.SetItemsProcessed(state.iterations() * 784 * 256);
}
BENCHMARK(BM_SparseLutStep)->Unit(benchmark::kMillisecond);

void BM_DeeprStarStep(benchmark::State& state) {
  Rng rng(2);
  ConnectionState s = init_connection_state(784, 256, 6, 6, rng, 1.0);
  const Matrix g = standard_normal_matrix(784, 256, rng) * 1e-2;
  RewiringSchedule sched;
  for (auto _ : state) {
    deepr_star_step(s, g, sched, rng);
    benchmark::DoNotOptimize(s.theta.data());
  }
}
BENCHMARK(BM_DeeprStarStep)->Unit(benchmark::kMillisecond);

// Truth-table enumeration for beta * F address bits (beta = 2).
void BM_EnumerateTable(benchmark::State& state) {
  const int fanin = static_cast<int>(state.range(0));
  const int degree = static_cast<int>(state.range(1));
  Rng rng(3);
  const TrainedModel m = random_model(ModelConfig::uniform(32, {4}, fanin, 2, degree), rng);
  const NeuronView v = neuron_view(m, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_truth_table(v).rows.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lut_cost(2, fanin)));
}
BENCHMARK(BM_EnumerateTable)->Args({4, 1})->Args({6, 1})->Args({6, 2})->Args({8, 1});

void BM_VerifyTable(benchmark::State& state) {
  Rng rng(4);
  const TrainedModel m = random_model(ModelConfig::uniform(32, {4}, 6, 2, 1), rng);
  const NeuronView v = neuron_view(m, 0, 0);
  const TruthTable t = enumerate_truth_table(v);
  for (auto _ : state) benchmark::DoNotOptimize(verify_table(t, v).pass);
}
BENCHMARK(BM_VerifyTable);

// Quantized forward pass of the HDR desk model over one mini-batch.
void BM_LutForward(benchmark::State& state) {
  Rng rng(5);
  const TrainedModel m = random_model(hdr_desk_preset(), rng);
  Rng data_rng(6);
  RowMatrix batch(64, 784);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = data_rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(batch, true).data());
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LutForward)->Unit(benchmark::kMicrosecond);

void BM_MaskSearchBackward(benchmark::State& state) {
  Rng rng(7);
  ModelConfig cfg = hdr_desk_preset();
  const MaskSearchNet net = MaskSearchNet::initialize(cfg, 0, rng);
  Matrix batch(64, 784);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = rng.uniform();
  std::vector<int> labels(64);
  for (auto& y : labels) y = static_cast<int>(rng.uniform_index(10));
  for (auto _ : state) benchmark::DoNotOptimize(net.backward(batch, labels).loss);
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_MaskSearchBackward)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
