#pragma once

#include <cstdint>
#include <vector>

#include "sparselut/math/rng.hpp"
#include "sparselut/math/types.hpp"

namespace sparselut {

/// Binary connectivity of one layer: bits(i, j) is set when input i feeds
/// output neuron j. `fanin` is the per-neuron target the mask was built for.
struct LayerMask {
  int n_in = 0;
  int n_out = 0;
  int fanin = 0;
  BoolMatrix bits;

  LayerMask() = default;
  LayerMask(int n_in, int n_out, int fanin);

  int column_count(int neuron) const;
  /// Connected input indices of `neuron`, ascending.
  std::vector<int> inputs(int neuron) const;
  int total_connections() const;
  /// True when every column has exactly `fanin` ones.
  bool is_exact() const;

  friend bool operator==(const LayerMask& a, const LayerMask& b) {
    return a.n_in == b.n_in && a.n_out == b.n_out && a.fanin == b.fanin && a.bits == b.bits;
  }
};

/// Per-layer connectivity for a whole network.
struct FeatureMask {
  std::vector<LayerMask> layers;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
};

/// Each output neuron gets `fanin` distinct inputs drawn uniformly without
/// replacement. Throws std::invalid_argument unless 1 <= fanin <= n_in.
LayerMask init_random_mask(int n_in, int n_out, int fanin, Rng& rng);

/// All-ones mask (the dense case, fanin = n_in).
LayerMask full_mask(int n_in, int n_out);

/// Order-sensitive 64-bit digest of the mask contents.
std::uint64_t mask_checksum(const FeatureMask& mask);

}  // namespace sparselut
