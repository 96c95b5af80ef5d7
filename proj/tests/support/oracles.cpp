#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace sltest {

using sparselut::Matrix;

std::uint32_t ref_quantize_code(double x, int bits, double lo, double hi) {
  const double levels = std::ldexp(1.0, bits);
  const double k = std::floor((x - lo) * levels / (hi - lo));
  return static_cast<std::uint32_t>(std::clamp(k, 0.0, levels - 1.0));
}

void RefAdam::step(Matrix& p, const Matrix& g, double lr, double b1, double b2, double eps, double wd) {
  if (m.size() == 0) {
    m = Matrix::Zero(p.rows(), p.cols());
    v = Matrix::Zero(p.rows(), p.cols());
  }
  ++t;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      p(i, j) *= 1.0 - lr * wd;
      m(i, j) = b1 * m(i, j) + (1.0 - b1) * g(i, j);
      v(i, j) = b2 * v(i, j) + (1.0 - b2) * g(i, j) * g(i, j);
      const double mh = m(i, j) / (1.0 - std::pow(b1, static_cast<double>(t)));
      const double vh = v(i, j) / (1.0 - std::pow(b2, static_cast<double>(t)));
      p(i, j) -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
}

std::vector<double> ref_monomials(const std::vector<double>& x, int degree) {
  std::vector<double> out{1.0};
  for (double xi : x) out.push_back(xi);
  if (degree == 2) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i; j < x.size(); ++j) out.push_back(x[i] * x[j]);
    }
  }
  return out;
}

std::uint32_t ref_table_row(const sparselut::NeuronView& n, std::uint64_t address) {
  const std::size_t f = n.inputs.size();
  const std::uint64_t radix = std::uint64_t{1} << n.in_q.bits;
  std::vector<double> x(f);
  // least significant field belongs to the last input
  for (std::size_t k = f; k-- > 0;) {
    const auto code = static_cast<double>(address % radix);
    address /= radix;
    x[k] = n.in_q.lo + code * (n.in_q.hi - n.in_q.lo) / static_cast<double>(radix);
  }
  const auto phi = ref_monomials(x, n.degree);
  double acc = 0.0;
  for (std::size_t m = 0; m < phi.size(); ++m) acc += n.weights[m] * phi[m];
  acc += n.bias;
  const double act = std::clamp(acc, 0.0, 1.0);
  return ref_quantize_code(act, n.out_q.bits, n.out_q.lo, n.out_q.hi);
}

std::vector<std::uint32_t> ref_infer_codes(const sparselut::TrainedModel& model,
                                           const std::vector<std::uint32_t>& input_codes) {
  std::vector<std::uint32_t> codes = input_codes;
  for (int l = 0; l < static_cast<int>(model.layers.size()); ++l) {
    const auto& layer = model.layers[static_cast<std::size_t>(l)];
    std::vector<std::uint32_t> next(static_cast<std::size_t>(layer.spec.n_out));
    for (int j = 0; j < layer.spec.n_out; ++j) {
      const auto view = sparselut::neuron_view(model, l, j);
      std::uint64_t address = 0;
      for (int i : layer.inputs[static_cast<std::size_t>(j)]) {
        address = (address << layer.in_q.bits) | codes[static_cast<std::size_t>(i)];
      }
      next[static_cast<std::size_t>(j)] = ref_table_row(view, address);
    }
    codes = std::move(next);
  }
  return codes;
}

double ref_loss(const sparselut::TrainedModel& model, const sparselut::RowMatrix& batch,
                const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < batch.rows(); ++r) {
    std::vector<double> h(batch.row(r).data(), batch.row(r).data() + batch.cols());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& layer = model.layers[l];
      std::vector<double> next(static_cast<std::size_t>(layer.spec.n_out));
      for (int j = 0; j < layer.spec.n_out; ++j) {
        std::vector<double> x;
        for (int i : layer.inputs[static_cast<std::size_t>(j)]) x.push_back(h[static_cast<std::size_t>(i)]);
        const auto phi = ref_monomials(x, layer.spec.degree);
        double z = layer.bias(j);
        for (std::size_t m = 0; m < phi.size(); ++m) z += layer.coeffs(j, static_cast<Eigen::Index>(m)) * phi[m];
        next[static_cast<std::size_t>(j)] = l + 1 == model.layers.size() ? z : std::clamp(z, 0.0, 1.0);
      }
      h = std::move(next);
    }
    const double mx = *std::max_element(h.begin(), h.end());
    double sum = 0.0;
    for (double z : h) sum += std::exp(z - mx);
    total += std::log(sum) + mx - h[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
  }
  return total / static_cast<double>(batch.rows());
}

std::filesystem::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("SPARSELUT_TEST_TMP");
  const std::filesystem::path base = env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "sparselut_tests";
  const auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Interval binomial_interval(double p, double n, double sigmas) {
  const double sd = std::sqrt(p * (1.0 - p) / n);
  return {p - sigmas * sd, p + sigmas * sd};
}

}  // namespace sltest
