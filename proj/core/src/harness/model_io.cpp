#include "sparselut/harness/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sparselut/errors.hpp"
#include "sparselut/harness/atomic_file.hpp"
#include "sparselut/model/neuron.hpp"

namespace sparselut {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'U', 'T', 'M', 'D', 'L', '1'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in_[pos_++])} << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in_[pos_++])} << (8 * i);
    return std::bit_cast<double>(v);
  }
  void expect_magic() {
    need(8);
    if (std::memcmp(in_.data(), kMagic, 8) != 0) throw FormatError("model file: bad magic");
    pos_ += 8;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw FormatError("model file truncated at byte " + std::to_string(pos_) + " (size " +
                        std::to_string(in_.size()) + ")");
    }
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

void write_q(Writer& w, const QuantizerSpec& q) {
  w.u32(static_cast<std::uint32_t>(q.bits));
  w.f64(q.lo);
  w.f64(q.hi);
}

QuantizerSpec read_q(Reader& r) {
  QuantizerSpec q;
  q.bits = static_cast<int>(r.u32());
  q.lo = r.f64();
  q.hi = r.f64();
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return q;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  Writer w;
  w.raw(kMagic, 8);
  w.u32(static_cast<std::uint32_t>(model.input_bits));
  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    w.u32(static_cast<std::uint32_t>(l.spec.n_in));
    w.u32(static_cast<std::uint32_t>(l.spec.n_out));
    w.u32(static_cast<std::uint32_t>(l.spec.fanin));
    w.u32(static_cast<std::uint32_t>(l.spec.act_bits));
    w.u32(static_cast<std::uint32_t>(l.spec.degree));
    write_q(w, l.in_q);
    write_q(w, l.out_q);
    for (const auto& in : l.inputs) {
      for (int i : in) w.u32(static_cast<std::uint32_t>(i));
    }
    for (Eigen::Index j = 0; j < l.coeffs.rows(); ++j) {
      for (Eigen::Index m = 0; m < l.coeffs.cols(); ++m) w.f64(l.coeffs(j, m));
    }
    for (Eigen::Index j = 0; j < l.bias.size(); ++j) w.f64(l.bias(j));
  }
  return w.take();
}

TrainedModel deserialize_model(const std::string& bytes) {
  Reader r(bytes);
  r.expect_magic();
  TrainedModel model;
  model.input_bits = static_cast<int>(r.u32());
  const std::uint32_t n_layers = r.u32();
  if (n_layers == 0 || n_layers > 1024) throw FormatError("model file: implausible layer count");
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    LutLayer layer;
    layer.spec.n_in = static_cast<int>(r.u32());
    layer.spec.n_out = static_cast<int>(r.u32());
    layer.spec.fanin = static_cast<int>(r.u32());
    layer.spec.act_bits = static_cast<int>(r.u32());
    layer.spec.degree = static_cast<int>(r.u32());
    try {
      layer.spec.validate();
    } catch (const std::invalid_argument& e) {
      throw FormatError("model file layer " + std::to_string(l) + ": " + e.what());
    }
    if (!model.layers.empty() && model.layers.back().spec.n_out != layer.spec.n_in) {
      throw FormatError("model file: layer widths do not chain");
    }
    layer.in_q = read_q(r);
    layer.out_q = read_q(r);
    for (int j = 0; j < layer.spec.n_out; ++j) {
      std::vector<int> in;
      for (int k = 0; k < layer.spec.fanin; ++k) {
        const auto i = static_cast<int>(r.u32());
        if (i < 0 || i >= layer.spec.n_in || (!in.empty() && i <= in.back())) {
          throw FormatError("model file: bad input index in layer " + std::to_string(l));
        }
        in.push_back(i);
      }
      layer.inputs.push_back(std::move(in));
    }
    const int terms = poly_feature_count(layer.spec.fanin, layer.spec.degree);
    layer.coeffs.resize(layer.spec.n_out, terms);
    for (int j = 0; j < layer.spec.n_out; ++j) {
      for (int m = 0; m < terms; ++m) layer.coeffs(j, m) = r.f64();
    }
    layer.bias.resize(layer.spec.n_out);
    for (int j = 0; j < layer.spec.n_out; ++j) layer.bias(j) = r.f64();
    model.layers.push_back(std::move(layer));
  }
  if (!r.at_end()) throw FormatError("model file: trailing bytes");
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_model(bytes);
}

}  // namespace sparselut
