#include "verilog_sim.hpp"

#include <regex>
#include <sstream>
#include <stdexcept>

namespace sltest {

std::uint64_t bits_to_u64(const Bits& b, int lo, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{b.at(static_cast<std::size_t>(lo + i))} << i;
  return v;
}

void u64_to_bits(Bits& b, int lo, int width, std::uint64_t v) {
  for (int i = 0; i < width; ++i) b.at(static_cast<std::size_t>(lo + i)) = (v >> i) & 1u;
}

namespace {

std::uint64_t parse_literal(const std::string& s) {
  static const std::regex lit(R"((\d+)'h([0-9a-fA-F]+))");
  std::smatch m;
  if (!std::regex_match(s, m, lit)) throw std::runtime_error("verilog: bad literal '" + s + "'");
  return std::stoull(m[2].str(), nullptr, 16);
}

Slice parse_slice(const std::string& text) {
  static const std::regex part(R"(\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[(\d+):(\d+)\])?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, part)) throw std::runtime_error("verilog: bad expression '" + text + "'");
  Slice s;
  s.signal = m[1].str();
  if (m[2].matched) {
    s.hi = std::stoi(m[2].str());
    s.lo = std::stoi(m[3].str());
  }
  return s;
}

std::vector<Slice> parse_expr(std::string text) {
  const auto open = text.find('{');
  if (open == std::string::npos) return {parse_slice(text)};
  const auto close = text.rfind('}');
  text = text.substr(open + 1, close - open - 1);
  std::vector<Slice> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_slice(part));
  return out;
}

int range_width(const std::string& range) {
  static const std::regex r(R"(\[(\d+):(\d+)\])");
  std::smatch m;
  if (!std::regex_search(range, m, r)) return 1;
  return std::stoi(m[1].str()) - std::stoi(m[2].str()) + 1;
}

}  // namespace

Design Design::parse(const std::vector<std::pair<std::string, std::string>>& files) {
  static const std::regex module_re(R"(^\s*module\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*$)");
  static const std::regex port_re(
      R"(^\s*(input|output)\s+(wire|reg)\s*(\[\d+:\d+\])?\s*([A-Za-z_][A-Za-z0-9_]*)\s*,?\s*$)");
  static const std::regex wire_re(R"(^\s*wire\s*(\[\d+:\d+\])?\s*([A-Za-z_][A-Za-z0-9_]*)\s*;\s*$)");
  static const std::regex case_head_re(R"(^\s*case\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)\s*$)");
  static const std::regex case_item_re(
      R"(^\s*(\d+'h[0-9a-fA-F]+|default)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\d+'h[0-9a-fA-F]+)\s*;\s*$)");
  static const std::regex inst_re(
      R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*;\s*$)");
  static const std::regex conn_re(R"(\.([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\))");
  static const std::regex clocked_re(
      R"(^\s*always\s*@\(posedge\s+clk\)\s*([A-Za-z_][A-Za-z0-9_]*)\s*<=\s*(.+?)\s*;\s*$)");
  static const std::regex comb_re(
      R"(^\s*always\s*@\(\*\)\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+?)\s*;\s*$)");
  static const std::regex assign_re(R"(^\s*assign\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+?)\s*;\s*$)");
  static const std::regex skip_re(
      R"(^\s*(\);|always @\(\*\) begin|endcase|end|//.*)?\s*$)");

  Design d;
  for (const auto& [file, text] : files) {
    std::istringstream in(text);
    Module* cur = nullptr;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::smatch m;
      const auto fail = [&] {
        throw std::runtime_error("verilog: " + file + ":" + std::to_string(line_no) + ": unsupported '" + line + "'");
      };
      if (std::regex_match(line, m, module_re)) {
        cur = &d.modules_[m[1].str()];
        cur->name = m[1].str();
        continue;
      }
      if (line.find("endmodule") != std::string::npos) {
        cur = nullptr;
        continue;
      }
      if (cur == nullptr) {
        if (std::regex_match(line, m, skip_re)) continue;
        fail();
      }
      if (std::regex_match(line, m, port_re)) {
        const std::string name = m[4].str();
        (m[1].str() == "input" ? cur->inputs : cur->outputs).push_back(name);
        cur->width[name] = range_width(m[3].str());
      } else if (std::regex_match(line, m, wire_re)) {
        cur->width[m[2].str()] = range_width(m[1].str());
      } else if (std::regex_match(line, m, case_head_re)) {
        cur->is_table = true;
        cur->table_in = m[1].str();
      } else if (std::regex_match(line, m, case_item_re)) {
        cur->table_out = m[2].str();
        const std::uint64_t value = parse_literal(m[3].str());
        if (m[1].str() == "default") {
          cur->default_value = value;
          cur->has_default = true;
        } else if (!cur->cases.emplace(parse_literal(m[1].str()), value).second) {
          throw std::runtime_error("verilog: duplicate case item in " + cur->name);
        }
      } else if (std::regex_match(line, m, clocked_re)) {
        cur->assigns.push_back({m[1].str(), parse_expr(m[2].str()), true});
      } else if (std::regex_match(line, m, comb_re) || std::regex_match(line, m, assign_re)) {
        cur->assigns.push_back({m[1].str(), parse_expr(m[2].str()), false});
      } else if (std::regex_match(line, m, inst_re)) {
        Instance inst;
        inst.module = m[1].str();
        inst.name = m[2].str();
        const std::string body = m[3].str();
        // part selects contain no parentheses, so a flat scan finds every .port(expr)
        for (auto it = std::sregex_iterator(body.begin(), body.end(), conn_re); it != std::sregex_iterator(); ++it) {
          inst.ports[(*it)[1].str()] = parse_expr((*it)[2].str());
        }
        cur->instances.push_back(std::move(inst));
      } else if (!std::regex_match(line, m, skip_re)) {
        fail();
      }
    }
  }
  return d;
}

const Module& Design::module(const std::string& name) const {
  const auto it = modules_.find(name);
  if (it == modules_.end()) throw std::runtime_error("verilog: unknown module " + name);
  return it->second;
}

Simulator::Simulator(const Design& design, std::string top) : design_(design), top_(std::move(top)) {
  const Module& m = design_.module(top_);
  for (const auto& in : m.inputs) inputs_[in] = Bits(static_cast<std::size_t>(m.width.at(in)), 0);
}

void Simulator::set_input(const std::string& port, const Bits& value) {
  const Module& m = design_.module(top_);
  if (value.size() != static_cast<std::size_t>(m.width.at(port))) throw std::runtime_error("verilog: width mismatch on " + port);
  inputs_[port] = value;
}

Bits Simulator::output(const std::string& port) {
  return evaluate(design_.module(top_), top_, inputs_, nullptr).at(port);
}

void Simulator::clock() {
  std::map<std::string, Bits> next;
  evaluate(design_.module(top_), top_, inputs_, &next);
  for (auto& [k, v] : next) state_[k] = std::move(v);
}

Simulator::Signals Simulator::evaluate(const Module& m, const std::string& path, const Signals& inputs,
                                       std::map<std::string, Bits>* next_state) {
  Signals sig;
  for (const auto& [name, w] : m.width) sig[name] = Bits(static_cast<std::size_t>(w), 0);
  for (const auto& in : m.inputs) {
    const auto it = inputs.find(in);
    if (it != inputs.end()) sig[in] = it->second;
  }

  if (m.is_table) {
    const Bits& addr = sig.at(m.table_in);
    const std::uint64_t a = bits_to_u64(addr, 0, static_cast<int>(addr.size()));
    const auto hit = m.cases.find(a);
    if (hit == m.cases.end() && !m.has_default) throw std::runtime_error("verilog: no case for address");
    Bits& out = sig.at(m.table_out);
    u64_to_bits(out, 0, static_cast<int>(out.size()), hit == m.cases.end() ? m.default_value : hit->second);
    return sig;
  }

  const auto read = [&](const std::vector<Slice>& expr) {
    Bits out;
    // concatenation lists MSB first; build LSB first by walking backwards
    for (auto it = expr.rbegin(); it != expr.rend(); ++it) {
      const Bits& src = sig.at(it->signal);
      const int lo = it->hi < 0 ? 0 : it->lo;
      const int hi = it->hi < 0 ? static_cast<int>(src.size()) - 1 : it->hi;
      for (int b = lo; b <= hi; ++b) out.push_back(src.at(static_cast<std::size_t>(b)));
    }
    return out;
  };
  const auto write = [&](const std::vector<Slice>& expr, const Bits& value) {
    if (expr.size() != 1) throw std::runtime_error("verilog: concatenated output connection");
    const Slice& s = expr.front();
    Bits& dst = sig.at(s.signal);
    const int lo = s.hi < 0 ? 0 : s.lo;
    const int width = s.hi < 0 ? static_cast<int>(dst.size()) : s.hi - s.lo + 1;
    if (static_cast<int>(value.size()) != width) throw std::runtime_error("verilog: width mismatch driving " + s.signal);
    for (int b = 0; b < width; ++b) dst.at(static_cast<std::size_t>(lo + b)) = value[static_cast<std::size_t>(b)];
  };

  // registered outputs present their stored value
  for (const auto& a : m.assigns) {
    if (!a.clocked) continue;
    const auto it = state_.find(path + "." + a.dst);
    if (it != state_.end()) sig[a.dst] = it->second;
  }
  // Emission order is topological; combinational assigns settle once
  // all instances have been evaluated, then instances run again so that
  // consumers of continuous assigns see the settled value.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& inst : m.instances) {
      const Module& child = design_.module(inst.module);
      Signals child_in;
      for (const auto& in : child.inputs) {
        const auto it = inst.ports.find(in);
        if (it != inst.ports.end()) child_in[in] = read(it->second);
      }
      const Signals child_sig = evaluate(child, path + "." + inst.name, child_in, next_state);
      for (const auto& out : child.outputs) {
        const auto it = inst.ports.find(out);
        if (it != inst.ports.end()) write(it->second, child_sig.at(out));
      }
    }
    for (const auto& a : m.assigns) {
      if (!a.clocked) sig[a.dst] = read(a.src);
    }
  }
  if (next_state != nullptr) {
    for (const auto& a : m.assigns) {
      if (a.clocked) (*next_state)[path + "." + a.dst] = read(a.src);
    }
  }
  return sig;
}

}  // namespace sltest
