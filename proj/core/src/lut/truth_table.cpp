#include "sparselut/lut/truth_table.hpp"

#include <stdexcept>
#include <string>

#include "sparselut/errors.hpp"
#include "sparselut/model/neuron.hpp"

namespace sparselut {

std::uint64_t lut_cost(int bits, int fanin) {
  if (bits < 1 || fanin < 1) throw std::invalid_argument("lut_cost: bits and fan-in must be >= 1");
  const auto width = static_cast<std::int64_t>(bits) * fanin;
  if (width > 63) {
    throw CapacityExceeded("lut_cost: 2^" + std::to_string(width) + " entries overflow 64-bit counts");
  }
  return std::uint64_t{1} << width;
}

NeuronView neuron_view(const TrainedModel& model, int layer, int neuron) {
  const LutLayer& ly = model.layers.at(static_cast<std::size_t>(layer));
  if (neuron < 0 || neuron >= ly.spec.n_out) throw std::invalid_argument("neuron index out of range");
  const auto& in = ly.inputs[static_cast<std::size_t>(neuron)];
  return NeuronView{layer,           neuron,          ly.weights(neuron), ly.bias(neuron), ly.spec.degree,
                    std::span(in),   ly.in_q,         ly.out_q};
}

std::uint32_t field_code(std::uint64_t address, int k, int fanin, int in_bits) {
  const int shift = in_bits * (fanin - 1 - k);
  return static_cast<std::uint32_t>((address >> shift) & ((std::uint64_t{1} << in_bits) - 1));
}

TruthTable enumerate_truth_table(const NeuronView& n) {
  const int fanin = static_cast<int>(n.inputs.size());
  const int width = n.in_q.bits * fanin;
  if (width > kMaxTableAddressBits) {
    throw CapacityExceeded("truth table for neuron " + std::to_string(n.layer) + "." +
                           std::to_string(n.neuron) + " needs " + std::to_string(width) +
                           " address bits, limit is " + std::to_string(kMaxTableAddressBits));
  }
  const auto expected_terms = static_cast<std::size_t>(poly_feature_count(fanin, n.degree));
  if (n.weights.size() != expected_terms) {
    throw std::invalid_argument("enumerate_truth_table: weight count does not match fan-in and degree");
  }
  const std::size_t rows = static_cast<std::size_t>(lut_cost(n.in_q.bits, fanin));

  // Decoded level value of every input field for every row.
  std::vector<std::vector<double>> field(static_cast<std::size_t>(fanin), std::vector<double>(rows));
  for (int k = 0; k < fanin; ++k) {
    auto& col = field[static_cast<std::size_t>(k)];
    for (std::size_t r = 0; r < rows; ++r) col[r] = level_value(field_code(r, k, fanin, n.in_q.bits), n.in_q);
  }

  // Accumulate one monomial at a time across all rows, in the same monomial
  // order and with the same per-row rounding sequence as neuron_forward.
  std::vector<double> acc(rows, 0.0);
  std::size_t m = 0;
  const double w0 = n.weights[m++];
  for (std::size_t r = 0; r < rows; ++r) acc[r] += w0 * 1.0;
  for (int i = 0; i < fanin; ++i) {
    const double w = n.weights[m++];
    const auto& xi = field[static_cast<std::size_t>(i)];
    for (std::size_t r = 0; r < rows; ++r) acc[r] += w * xi[r];
  }
  if (n.degree == 2) {
    for (int i = 0; i < fanin; ++i) {
      for (int j = i; j < fanin; ++j) {
        const double w = n.weights[m++];
        const auto& xi = field[static_cast<std::size_t>(i)];
        const auto& xj = field[static_cast<std::size_t>(j)];
        for (std::size_t r = 0; r < rows; ++r) acc[r] += w * (xi[r] * xj[r]);
      }
    }
  }

  TruthTable table;
  table.layer = n.layer;
  table.neuron = n.neuron;
  table.in_bits = n.in_q.bits;
  table.out_bits = n.out_q.bits;
  table.inputs.assign(n.inputs.begin(), n.inputs.end());
  table.rows.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    table.rows[r] = quantize_code(clipped_relu(acc[r] + n.bias), n.out_q);
  }
  return table;
}

VerifyResult verify_table(const TruthTable& table, const NeuronView& n) {
  VerifyResult result;
  const int fanin = static_cast<int>(n.inputs.size());
  if (table.fanin() != fanin || table.in_bits != n.in_q.bits || table.out_bits != n.out_q.bits ||
      table.rows.size() != lut_cost(n.in_q.bits, fanin)) {
    result.pass = false;
    result.first_mismatch = 0;
    return result;
  }
  std::vector<double> x(static_cast<std::size_t>(fanin));
  const std::uint64_t radix = n.in_q.levels();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    // digits of r in base 2^in_bits, least significant digit = last input
    std::uint64_t rest = r;
    for (int k = fanin - 1; k >= 0; --k) {
      x[static_cast<std::size_t>(k)] = level_value(static_cast<std::uint32_t>(rest % radix), n.in_q);
      rest /= radix;
    }
    const double y = neuron_forward(x, n.weights, n.bias, n.degree, Activation::clipped_relu, n.out_q);
    const std::uint32_t want = quantize_code(y, n.out_q);
    if (want != table.rows[r]) {
      result.pass = false;
      result.first_mismatch = r;
      result.expected = want;
      result.actual = table.rows[r];
      return result;
    }
  }
  return result;
}

}  // namespace sparselut
