#include "sparselut/lut/rtl.hpp"

#include <sstream>
#include <string>

#include "sparselut/errors.hpp"
#include "sparselut/harness/atomic_file.hpp"
#include "sparselut/lut/table_io.hpp"

namespace sparselut {

namespace {

std::string hex_literal(std::uint64_t v, int bits) {
  std::ostringstream s;
  s << bits << "'h" << std::hex << v;
  return s.str();
}

std::string neuron_module_name(int layer, int neuron) {
  return "sl_l" + std::to_string(layer) + "_n" + std::to_string(neuron);
}

std::string bit_range(int lo, int width) {
  return "[" + std::to_string(lo + width - 1) + ":" + std::to_string(lo) + "]";
}

void emit_neuron(std::ostringstream& out, const TruthTable& t) {
  const int aw = t.address_bits();
  out << "module " << neuron_module_name(t.layer, t.neuron) << " (\n"
      << "  input  wire " << bit_range(0, aw) << " addr,\n"
      << "  output reg  " << bit_range(0, t.out_bits) << " code\n"
      << ");\n"
      << "  always @(*) begin\n"
      << "    case (addr)\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out << "      " << hex_literal(r, aw) << ": code = " << hex_literal(t.rows[r], t.out_bits) << ";\n";
  }
  out << "      default: code = " << hex_literal(0, t.out_bits) << ";\n"
      << "    endcase\n"
      << "  end\n"
      << "endmodule\n\n";
}

void emit_layer(std::ostringstream& out, const NetlistLayer& layer) {
  out << "module sl_layer" << layer.index << " (\n"
      << "  input  wire clk,\n"
      << "  input  wire " << bit_range(0, layer.in_width()) << " in_bus,\n"
      << "  output reg  " << bit_range(0, layer.out_width()) << " out_bus\n"
      << ");\n"
      << "  wire " << bit_range(0, layer.out_width()) << " comb;\n";
  for (int j = 0; j < layer.n_out; ++j) {
    out << "  " << neuron_module_name(layer.index, j) << " u_n" << j << " (.addr({";
    const auto& in = layer.inputs[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < in.size(); ++k) {
      out << (k ? ", " : "") << "in_bus" << bit_range(in[k] * layer.in_bits, layer.in_bits);
    }
    out << "}), .code(comb" << bit_range(j * layer.out_bits, layer.out_bits) << "));\n";
  }
  if (layer.registered) {
    out << "  always @(posedge clk) out_bus <= comb;\n";
  } else {
    out << "  always @(*) out_bus = comb;\n";
  }
  out << "endmodule\n";
}

}  // namespace

int Netlist::pipeline_depth() const {
  int depth = 0;
  for (const auto& l : layers) depth += l.registered ? 1 : 0;
  return depth;
}

void Netlist::validate(std::size_t table_count) const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& ly = layers[l];
    if (l > 0 && ly.in_width() != layers[l - 1].out_width()) {
      throw InvalidState("netlist: layer " + std::to_string(l) + " input bus is " +
                         std::to_string(ly.in_width()) + " bits, previous layer drives " +
                         std::to_string(layers[l - 1].out_width()));
    }
    if (ly.tables.size() != static_cast<std::size_t>(ly.n_out) ||
        ly.inputs.size() != static_cast<std::size_t>(ly.n_out)) {
      throw InvalidState("netlist: layer " + std::to_string(l) + " neuron count mismatch");
    }
    for (int j = 0; j < ly.n_out; ++j) {
      if (ly.tables[static_cast<std::size_t>(j)] >= table_count) {
        throw InvalidState("netlist: dangling table reference");
      }
      for (int i : ly.inputs[static_cast<std::size_t>(j)]) {
        if (i < 0 || i >= ly.n_in) throw InvalidState("netlist: input index out of range");
      }
    }
  }
}

std::uint64_t CompiledModel::total_entries() const {
  std::uint64_t total = 0;
  for (const auto& t : tables) total += t.rows.size();
  return total;
}

CompiledModel compile_model(const TrainedModel& model) {
  CompiledModel out;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LutLayer& ly = model.layers[l];
    NetlistLayer nl;
    nl.index = static_cast<int>(l);
    nl.n_in = ly.spec.n_in;
    nl.n_out = ly.spec.n_out;
    nl.in_bits = ly.in_q.bits;
    nl.out_bits = ly.out_q.bits;
    for (int j = 0; j < ly.spec.n_out; ++j) {
      const NeuronView view = neuron_view(model, static_cast<int>(l), j);
      TruthTable table = enumerate_truth_table(view);
      const VerifyResult check = verify_table(table, view);
      if (!check.pass) {
        throw InvalidState("truth table " + std::to_string(l) + "." + std::to_string(j) +
                           " disagrees with the model at row " +
                           std::to_string(check.first_mismatch.value_or(0)));
      }
      table.verified = true;
      nl.tables.push_back(out.tables.size());
      nl.inputs.push_back(table.inputs);
      out.tables.push_back(std::move(table));
    }
    out.netlist.layers.push_back(std::move(nl));
  }
  out.netlist.validate(out.tables.size());
  return out;
}

std::vector<RtlFile> emit_rtl(const Netlist& netlist, const std::vector<TruthTable>& tables) {
  netlist.validate(tables.size());
  std::vector<RtlFile> files;
  for (const auto& layer : netlist.layers) {
    std::ostringstream out;
    out << "// layer " << layer.index << ": " << layer.n_out << " neurons, " << layer.in_bits
        << "-bit inputs, " << layer.out_bits << "-bit outputs\n\n";
    for (int j = 0; j < layer.n_out; ++j) {
      const TruthTable& t = tables[layer.tables[static_cast<std::size_t>(j)]];
      if (!t.verified) {
        throw InvalidState("emit_rtl: table " + std::to_string(t.layer) + "." + std::to_string(t.neuron) +
                           " has not been verified");
      }
      if (t.layer != layer.index || t.neuron != j || t.inputs != layer.inputs[static_cast<std::size_t>(j)] ||
          t.in_bits != layer.in_bits || t.out_bits != layer.out_bits) {
        throw InvalidState("emit_rtl: table " + std::to_string(t.layer) + "." + std::to_string(t.neuron) +
                           " does not match its netlist slot");
      }
      emit_neuron(out, t);
    }
    emit_layer(out, layer);
    files.push_back({"layer" + std::to_string(layer.index) + ".v", out.str()});
  }

  std::ostringstream top;
  const auto& first = netlist.layers.front();
  const auto& last = netlist.layers.back();
  top << "// " << netlist.layers.size() << " layers, pipeline depth " << netlist.pipeline_depth() << "\n\n"
      << "module sparselut_top (\n"
      << "  input  wire clk,\n"
      << "  input  wire " << bit_range(0, first.in_width()) << " in_bus,\n"
      << "  output wire " << bit_range(0, last.out_width()) << " out_bus\n"
      << ");\n";
  for (const auto& layer : netlist.layers) {
    top << "  wire " << bit_range(0, layer.out_width()) << " l" << layer.index << "_out;\n";
  }
  for (const auto& layer : netlist.layers) {
    const std::string src = layer.index == 0 ? "in_bus" : "l" + std::to_string(layer.index - 1) + "_out";
    top << "  sl_layer" << layer.index << " u_layer" << layer.index << " (.clk(clk), .in_bus(" << src
        << "), .out_bus(l" << layer.index << "_out));\n";
  }
  top << "  assign out_bus = l" << last.index << "_out;\n"
      << "endmodule\n";
  files.push_back({"top.v", top.str()});
  return files;
}

void write_compiled(const CompiledModel& compiled, const std::vector<RtlFile>& rtl,
                    const std::filesystem::path& dir) {
  for (const auto& f : rtl) write_file_atomic(dir / f.name, f.text);
  for (const auto& t : compiled.tables) {
    write_truth_table(t, dir / "tables" / (std::to_string(t.layer) + "_" + std::to_string(t.neuron) + ".tbl"));
  }
}

}  // namespace sparselut
