#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparselut/lut/truth_table.hpp"
#include "sparselut/model/lut_network.hpp"

namespace sparselut {

/// One pipeline stage: neuron j of the layer reads the `in_bits`-wide fields
/// inputs[j] of the input bus (field i occupies bits [i*in_bits, (i+1)*in_bits))
/// through table tables[j]; outputs are packed the same way and registered.
struct NetlistLayer {
  int index = 0;
  int n_in = 0;
  int n_out = 0;
  int in_bits = 0;
  int out_bits = 0;
  std::vector<std::size_t> tables;
  std::vector<std::vector<int>> inputs;
  bool registered = true;

  int in_width() const { return n_in * in_bits; }
  int out_width() const { return n_out * out_bits; }
};

struct Netlist {
  std::vector<NetlistLayer> layers;

  int pipeline_depth() const;
  /// Throws InvalidState if bus widths do not chain or an index is out of range.
  void validate(std::size_t table_count) const;
};

struct CompiledModel {
  Netlist netlist;
  std::vector<TruthTable> tables;  // ordered by (layer, neuron)

  std::uint64_t total_entries() const;
};

/// Enumerates every neuron's table, verifies it against the scalar path and
/// assembles the netlist. Throws InvalidState naming the first neuron whose
/// table fails verification; CapacityExceeded propagates from enumeration.
CompiledModel compile_model(const TrainedModel& model);

struct RtlFile {
  std::string name;
  std::string text;
};

/// Verilog-2001: per layer file "layer<k>.v" holding one combinational
/// case-statement module per neuron plus the registered layer module, and
/// "top.v" chaining the layers. Output is a pure function of the inputs.
/// Throws InvalidState for unverified tables or an inconsistent netlist.
std::vector<RtlFile> emit_rtl(const Netlist& netlist, const std::vector<TruthTable>& tables);

/// Writes the RTL files plus tables/<layer>_<neuron>.tbl under `dir`.
void write_compiled(const CompiledModel& compiled, const std::vector<RtlFile>& rtl,
                    const std::filesystem::path& dir);

}  // namespace sparselut
