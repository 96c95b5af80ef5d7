#include "sparselut/harness/mask_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sparselut/errors.hpp"
#include "sparselut/harness/atomic_file.hpp"

namespace sparselut {

namespace {

constexpr const char* kMagic = "SPARSELUT-MASK v1";

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("mask line " + std::to_string(line) + ": " + what);
}

std::vector<long long> parse_ints(const std::string& text, std::size_t line) {
  std::istringstream s(text);
  std::vector<long long> out;
  std::string tok;
  while (s >> tok) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      fail(line, "'" + tok + "' is not an integer");
    }
    if (used != tok.size()) fail(line, "'" + tok + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

// "layer <k> in <N> out <M> fanin <F>" and "layers <L>"
std::vector<long long> parse_keyed(const std::string& text, const std::vector<std::string>& keys,
                                   std::size_t line) {
  std::istringstream s(text);
  std::vector<long long> values;
  for (const auto& key : keys) {
    std::string k;
    std::string v;
    if (!(s >> k >> v) || k != key) fail(line, "expected '" + key + " <n>'");
    const auto parsed = parse_ints(v, line);
    if (parsed.size() != 1) fail(line, "expected a number after '" + key + "'");
    values.push_back(parsed.front());
  }
  std::string extra;
  if (s >> extra) fail(line, "unexpected trailing text '" + extra + "'");
  return values;
}

}  // namespace

void write_mask(const FeatureMask& mask, std::ostream& out) {
  out << kMagic << '\n' << "layers " << mask.layers.size() << '\n';
  for (std::size_t l = 0; l < mask.layers.size(); ++l) {
    const LayerMask& m = mask.layers[l];
    out << "layer " << l << " in " << m.n_in << " out " << m.n_out << " fanin " << m.fanin << '\n';
    for (int j = 0; j < m.n_out; ++j) {
      const auto in = m.inputs(j);
      if (static_cast<int>(in.size()) != m.fanin) {
        throw std::invalid_argument("write_mask: layer " + std::to_string(l) + " neuron " +
                                    std::to_string(j) + " has " + std::to_string(in.size()) +
                                    " inputs, fan-in is " + std::to_string(m.fanin));
      }
      for (std::size_t k = 0; k < in.size(); ++k) out << (k ? " " : "") << in[k];
      out << '\n';
    }
  }
}

std::string mask_to_string(const FeatureMask& mask) {
  std::ostringstream s;
  write_mask(mask, s);
  return s.str();
}

void write_mask(const FeatureMask& mask, const std::filesystem::path& path) {
  write_file_atomic(path, mask_to_string(mask));
}

FeatureMask read_mask(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, text)) fail(line + 1, std::string("unexpected end of file, expected ") + what);
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
  };

  next("header");
  if (text != kMagic) fail(line, std::string("expected '") + kMagic + "'");
  next("layer count");
  const long long n_layers = parse_keyed(text, {"layers"}, line)[0];
  if (n_layers < 1) fail(line, "layer count must be >= 1");

  FeatureMask mask;
  for (long long l = 0; l < n_layers; ++l) {
    next("layer header");
    const auto h = parse_keyed(text, {"layer", "in", "out", "fanin"}, line);
    if (h[0] != l) fail(line, "expected layer " + std::to_string(l));
    if (h[1] < 1 || h[2] < 1 || h[3] < 1 || h[3] > h[1] || h[1] > (1 << 24) || h[2] > (1 << 24)) {
      fail(line, "invalid layer dimensions");
    }
    if (!mask.layers.empty() && mask.layers.back().n_out != h[1]) {
      fail(line, "layer input width does not match previous layer output");
    }
    LayerMask m(static_cast<int>(h[1]), static_cast<int>(h[2]), static_cast<int>(h[3]));
    for (int j = 0; j < m.n_out; ++j) {
      next("neuron inputs");
      const auto idx = parse_ints(text, line);
      if (static_cast<int>(idx.size()) != m.fanin) {
        fail(line, "expected " + std::to_string(m.fanin) + " indices, found " + std::to_string(idx.size()));
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= m.n_in) fail(line, "index " + std::to_string(idx[k]) + " out of range");
        if (k > 0 && idx[k] == idx[k - 1]) fail(line, "duplicate index " + std::to_string(idx[k]));
        if (k > 0 && idx[k] < idx[k - 1]) fail(line, "indices must be ascending");
        m.bits(static_cast<Eigen::Index>(idx[k]), j) = true;
      }
    }
    mask.layers.push_back(std::move(m));
  }
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") != std::string::npos) fail(line, "unexpected trailing content");
  }
  return mask;
}

FeatureMask read_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open mask file " + path.string());
  return read_mask(in);
}

}  // namespace sparselut
