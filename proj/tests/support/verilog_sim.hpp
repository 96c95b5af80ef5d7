#pragma once

// Cycle-level evaluator for the structural Verilog subset the RTL emitter
// produces: case-table modules, instance wiring with part selects and
// concatenations, registered or combinational output assignments, and
// continuous assigns. Written independently of the emitter so the two can be
// checked against each other.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sltest {

using Bits = std::vector<std::uint8_t>;  // bit i at index i (LSB first)

std::uint64_t bits_to_u64(const Bits& b, int lo, int width);
void u64_to_bits(Bits& b, int lo, int width, std::uint64_t v);

struct Slice {
  std::string signal;
  int hi = -1;  // -1: whole signal
  int lo = -1;
};

struct Instance {
  std::string module;
  std::string name;
  std::map<std::string, std::vector<Slice>> ports;  // concatenation, MSB first
};

struct RegAssign {
  std::string dst;
  std::vector<Slice> src;
  bool clocked = false;
};

struct Module {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, int> width;  // ports and wires
  bool is_table = false;
  std::string table_in;
  std::string table_out;
  std::map<std::uint64_t, std::uint64_t> cases;
  std::uint64_t default_value = 0;
  bool has_default = false;
  std::vector<Instance> instances;
  std::vector<RegAssign> assigns;
};

class Design {
 public:
  /// Parses every module in every file. Throws std::runtime_error on text
  /// outside the supported subset.
  static Design parse(const std::vector<std::pair<std::string, std::string>>& files);
  const Module& module(const std::string& name) const;
  bool has(const std::string& name) const { return modules_.contains(name); }

 private:
  std::map<std::string, Module> modules_;
};

class Simulator {
 public:
  Simulator(const Design& design, std::string top);

  void set_input(const std::string& port, const Bits& value);
  /// Settles combinational logic under the current register state.
  Bits output(const std::string& port);
  /// One rising edge: every clocked register samples its settled input.
  void clock();

 private:
  using Signals = std::map<std::string, Bits>;
  Signals evaluate(const Module& m, const std::string& path, const Signals& inputs,
                   std::map<std::string, Bits>* next_state);

  const Design& design_;
  std::string top_;
  Signals inputs_;
  std::map<std::string, Bits> state_;  // hierarchical path of each clocked register
};

}  // namespace sltest
