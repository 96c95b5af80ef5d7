#include "sparselut/lut/table_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sparselut/errors.hpp"
#include "sparselut/harness/atomic_file.hpp"

namespace sparselut {

namespace {

int hex_width(int bits) { return (bits + 3) / 4; }

std::string to_hex(std::uint64_t v, int width) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = width - 1; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("truth table line " + std::to_string(line) + ": " + what);
}

int parse_int(std::string_view text, std::size_t line, const char* what) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) fail(line, std::string("bad ") + what);
  return v;
}

std::uint64_t parse_hex(std::string_view text, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 16);
  if (text.empty() || ec != std::errc() || p != text.data() + text.size()) fail(line, "bad hex value");
  return v;
}

std::string_view value_of(std::string_view token, std::string_view key, std::size_t line) {
  if (token.substr(0, key.size()) != key) fail(line, "expected '" + std::string(key) + "'");
  return token.substr(key.size());
}

}  // namespace

void write_truth_table(const TruthTable& t, std::ostream& out) {
  out << "LUTTBL v1 neuron=" << t.layer << '.' << t.neuron << " beta=" << t.in_bits
      << " fanin=" << t.fanin() << " inputs=";
  for (std::size_t k = 0; k < t.inputs.size(); ++k) out << (k ? "," : "") << t.inputs[k];
  if (t.out_bits != t.in_bits) out << " out_beta=" << t.out_bits;
  out << '\n';
  const int iw = hex_width(t.address_bits());
  const int ow = hex_width(t.out_bits);
  for (std::size_t r = 0; r < t.rows.size(); ++r) out << to_hex(r, iw) << ' ' << to_hex(t.rows[r], ow) << '\n';
}

void write_truth_table(const TruthTable& table, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_truth_table(table, buf);
  write_file_atomic(path, buf.str());
}

TruthTable read_truth_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(1, "missing header");
  std::istringstream header(line);
  std::vector<std::string> tok;
  for (std::string s; header >> s;) tok.push_back(s);
  if (tok.size() < 6 || tok.size() > 7 || tok[0] != "LUTTBL" || tok[1] != "v1") {
    fail(1, "expected 'LUTTBL v1 neuron=.. beta=.. fanin=.. inputs=..'");
  }
  TruthTable t;
  const auto id = value_of(tok[2], "neuron=", 1);
  const auto dot = id.find('.');
  if (dot == std::string_view::npos) fail(1, "neuron id must be <layer>.<index>");
  t.layer = parse_int(id.substr(0, dot), 1, "layer index");
  t.neuron = parse_int(id.substr(dot + 1), 1, "neuron index");
  t.in_bits = parse_int(value_of(tok[3], "beta=", 1), 1, "beta");
  const int fanin = parse_int(value_of(tok[4], "fanin=", 1), 1, "fanin");
  std::string_view list = value_of(tok[5], "inputs=", 1);
  while (!list.empty()) {
    const auto comma = list.find(',');
    t.inputs.push_back(parse_int(list.substr(0, comma), 1, "input index"));
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
  }
  t.out_bits = tok.size() == 7 ? parse_int(value_of(tok[6], "out_beta=", 1), 1, "out_beta") : t.in_bits;
  if (t.in_bits < 1 || t.out_bits < 1 || t.out_bits > 32) fail(1, "bit widths out of range");
  if (fanin != t.fanin()) fail(1, "fanin does not match the number of inputs");
  if (t.address_bits() > kMaxTableAddressBits) fail(1, "address width exceeds the supported limit");

  const std::size_t rows = std::size_t{1} << t.address_bits();
  t.rows.reserve(rows);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) fail(line_no, "expected '<input> <output>'");
    const auto addr = parse_hex(std::string_view(line).substr(0, space), line_no);
    const auto code = parse_hex(std::string_view(line).substr(space + 1), line_no);
    if (addr != t.rows.size()) fail(line_no, "rows must be listed in ascending input order");
    if (code >= (std::uint64_t{1} << t.out_bits)) fail(line_no, "output code exceeds out_beta bits");
    t.rows.push_back(static_cast<std::uint32_t>(code));
  }
  if (t.rows.size() != rows) {
    fail(line_no, "expected " + std::to_string(rows) + " rows, found " + std::to_string(t.rows.size()));
  }
  return t;
}

TruthTable read_truth_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open truth table " + path.string());
  return read_truth_table(in);
}

}  // namespace sparselut
