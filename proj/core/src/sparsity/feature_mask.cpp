#include "sparselut/sparsity/feature_mask.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace sparselut {

LayerMask::LayerMask(int n_in_, int n_out_, int fanin_)
    : n_in(n_in_), n_out(n_out_), fanin(fanin_), bits(BoolMatrix::Constant(n_in_, n_out_, false)) {}

int LayerMask::column_count(int neuron) const {
  return static_cast<int>(bits.col(neuron).count());
}

std::vector<int> LayerMask::inputs(int neuron) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(fanin));
  for (int i = 0; i < n_in; ++i) {
    if (bits(i, neuron)) out.push_back(i);
  }
  return out;
}

int LayerMask::total_connections() const { return static_cast<int>(bits.count()); }

bool LayerMask::is_exact() const {
  for (int j = 0; j < n_out; ++j) {
    if (column_count(j) != fanin) return false;
  }
  return true;
}

LayerMask init_random_mask(int n_in, int n_out, int fanin, Rng& rng) {
  if (n_in < 1 || n_out < 1) throw std::invalid_argument("init_random_mask: empty layer");
  if (fanin < 1 || fanin > n_in) {
    throw std::invalid_argument("init_random_mask: fanin " + std::to_string(fanin) +
                                " outside [1, " + std::to_string(n_in) + "]");
  }
  LayerMask mask(n_in, n_out, fanin);
  std::vector<int> pool(static_cast<std::size_t>(n_in));
  for (int j = 0; j < n_out; ++j) {
    std::iota(pool.begin(), pool.end(), 0);
    // partial Fisher-Yates: the first `fanin` slots become the sample
    for (int k = 0; k < fanin; ++k) {
      const auto pick = static_cast<std::size_t>(k) + rng.uniform_index(static_cast<std::size_t>(n_in - k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
      mask.bits(pool[static_cast<std::size_t>(k)], j) = true;
    }
  }
  return mask;
}

LayerMask full_mask(int n_in, int n_out) {
  LayerMask mask(n_in, n_out, n_in);
  mask.bits.setConstant(true);
  return mask;
}

std::uint64_t mask_checksum(const FeatureMask& mask) {
  std::uint64_t h = mix64(mask.layers.size());
  for (const auto& layer : mask.layers) {
    h = mix64(h ^ static_cast<std::uint64_t>(layer.n_in));
    h = mix64(h ^ static_cast<std::uint64_t>(layer.n_out));
    h = mix64(h ^ static_cast<std::uint64_t>(layer.fanin));
    for (int j = 0; j < layer.n_out; ++j) {
      for (int i : layer.inputs(j)) h = mix64(h ^ (static_cast<std::uint64_t>(i) << 20 | static_cast<std::uint64_t>(j)));
    }
  }
  return h;
}

}  // namespace sparselut
