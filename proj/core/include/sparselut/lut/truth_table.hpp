#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sparselut/math/quantizer.hpp"
#include "sparselut/model/lut_network.hpp"

namespace sparselut {

/// Widest neuron address (in_bits * fanin) that will be enumerated.
inline constexpr int kMaxTableAddressBits = 24;

/// 2^(bits * fanin): entries of one neuron's truth table.
/// Throws std::invalid_argument for non-positive arguments and
/// CapacityExceeded when the count does not fit below 2^64.
std::uint64_t lut_cost(int bits, int fanin);

/// Exhaustive input-code -> output-code map of one neuron.
///
/// Row r is the input code whose most significant `in_bits` field is the
/// level code of inputs[0], the next field inputs[1], and so on. Each row
/// stores the unsigned level index of the neuron's quantized output.
struct TruthTable {
  int layer = 0;
  int neuron = 0;
  int in_bits = 0;
  int out_bits = 0;
  std::vector<int> inputs;
  std::vector<std::uint32_t> rows;
  bool verified = false;  // set by compile_model after verify_table passes

  int fanin() const { return static_cast<int>(inputs.size()); }
  int address_bits() const { return in_bits * fanin(); }

  friend bool operator==(const TruthTable& a, const TruthTable& b) {
    return a.layer == b.layer && a.neuron == b.neuron && a.in_bits == b.in_bits &&
           a.out_bits == b.out_bits && a.inputs == b.inputs && a.rows == b.rows;
  }
};

/// Everything needed to evaluate one neuron in isolation.
struct NeuronView {
  int layer = 0;
  int neuron = 0;
  std::span<const double> weights;
  double bias = 0.0;
  int degree = 1;
  std::span<const int> inputs;
  QuantizerSpec in_q;
  QuantizerSpec out_q;
};

NeuronView neuron_view(const TrainedModel& model, int layer, int neuron);

/// Level code of field `k` (0 = most significant) of an address.
std::uint32_t field_code(std::uint64_t address, int k, int fanin, int in_bits);

/// Enumerates every input code. Evaluation runs monomial-major over all rows
/// at once. Throws CapacityExceeded when in_bits * fanin > kMaxTableAddressBits.
TruthTable enumerate_truth_table(const NeuronView& neuron);

struct VerifyResult {
  bool pass = true;
  std::optional<std::size_t> first_mismatch;
  std::uint32_t expected = 0;
  std::uint32_t actual = 0;
};

/// Recomputes every row through neuron_forward, one row at a time, and
/// compares the output codes exactly.
VerifyResult verify_table(const TruthTable& table, const NeuronView& neuron);

}  // namespace sparselut
