#include "sparselut/harness/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparselut/errors.hpp"

namespace sparselut {

Dataset Dataset::subset(std::span<const Eigen::Index> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), dims());
  out.labels.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(indices[r]);
    out.labels[r] = labels[static_cast<std::size_t>(indices[r])];
  }
  return out;
}

// ---------------------------------------------------------------- IDX files

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void require_size(const std::vector<unsigned char>& b, std::size_t expected,
                  const std::filesystem::path& path) {
  if (b.size() < expected) {
    throw FormatError(path.string() + ": truncated, expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(b.size()));
  }
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_bytes(images);
  require_size(img, 16, images);
  if (be32(img, 0) != 0x00000803) {
    throw FormatError(images.string() + ": bad magic number, expected 0x00000803");
  }
  const std::size_t count = be32(img, 4);
  const std::size_t rows = be32(img, 8);
  const std::size_t cols = be32(img, 12);
  require_size(img, 16 + count * rows * cols, images);

  const auto lab = read_bytes(labels);
  require_size(lab, 8, labels);
  if (be32(lab, 0) != 0x00000801) {
    throw FormatError(labels.string() + ": bad magic number, expected 0x00000801");
  }
  const std::size_t label_count = be32(lab, 4);
  require_size(lab, 8 + label_count, labels);
  if (label_count != count) {
    throw FormatError("image file holds " + std::to_string(count) + " samples, label file " +
                      std::to_string(label_count));
  }

  Dataset data;
  data.num_classes = 10;
  const std::size_t dims = rows * cols;
  data.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dims));
  data.labels.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t p = 0; p < dims; ++p) {
      data.features(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p)) =
          static_cast<double>(img[16 + s * dims + p]) / 256.0;
    }
    const int y = lab[8 + s];
    if (y > 9) throw FormatError(labels.string() + ": label " + std::to_string(y) + " out of range");
    data.labels[s] = y;
  }
  return data;
}

DatasetSplits load_mnist_dir(const std::filesystem::path& dir) {
  return {load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"),
          load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte")};
}

// ---------------------------------------------------------------- CSV

ColumnScaling ColumnScaling::fit(const RowMatrix& features) {
  ColumnScaling s;
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    s.min.push_back(features.rows() ? features.col(c).minCoeff() : 0.0);
    s.max.push_back(features.rows() ? features.col(c).maxCoeff() : 0.0);
  }
  return s;
}

void ColumnScaling::apply(RowMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != min.size()) {
    throw std::invalid_argument("ColumnScaling: column count mismatch");
  }
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double lo = min[static_cast<std::size_t>(c)];
    const double range = max[static_cast<std::size_t>(c)] - lo;
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      double& v = features(r, c);
      v = range > 0.0 ? std::clamp((v - lo) / range, 0.0, 1.0) : 0.0;
    }
  }
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  while (true) {
    const auto comma = line.find(',');
    auto cell = line.substr(0, comma);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return !cell.empty() && ec == std::errc() && p == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

CsvDataset load_csv_dataset(const std::filesystem::path& path, int n_features, int n_classes,
                            const ColumnScaling* scaling) {
  if (n_features < 1 || n_classes < 1) throw std::invalid_argument("load_csv_dataset: bad schema");
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());

  std::vector<double> values;
  std::vector<int> labels;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_cells(line);
    double probe = 0.0;
    if (first && !parse_double(cells.front(), probe)) {
      first = false;  // header row
      continue;
    }
    first = false;
    if (cells.size() != static_cast<std::size_t>(n_features) + 1) {
      throw FormatError(path.string() + " row " + std::to_string(row) + ": expected " +
                        std::to_string(n_features + 1) + " cells, found " + std::to_string(cells.size()));
    }
    for (int c = 0; c < n_features; ++c) {
      double v = 0.0;
      if (!parse_double(cells[static_cast<std::size_t>(c)], v)) {
        throw FormatError(path.string() + " row " + std::to_string(row) + ": non-numeric cell " +
                          std::to_string(c + 1));
      }
      values.push_back(v);
    }
    double label = 0.0;
    const auto& lc = cells.back();
    if (!parse_double(lc, label) || label != std::floor(label)) {
      throw FormatError(path.string() + " row " + std::to_string(row) + ": label is not an integer");
    }
    if (label < 0 || label >= n_classes) {
      throw FormatError(path.string() + " row " + std::to_string(row) + ": label " +
                        std::to_string(static_cast<long long>(label)) + " outside [0, " +
                        std::to_string(n_classes) + ")");
    }
    labels.push_back(static_cast<int>(label));
  }

  CsvDataset out;
  out.data.num_classes = n_classes;
  out.data.labels = std::move(labels);
  out.data.features = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(out.data.labels.size()),
                                            n_features);
  out.scaling = scaling ? *scaling : ColumnScaling::fit(out.data.features);
  out.scaling.apply(out.data.features);
  return out;
}

// ---------------------------------------------------------------- synthetic

Dataset synth_centered_blobs(int n_samples, int side, int n_classes, Rng& rng) {
  if (side < 8) throw std::invalid_argument("synth_centered_blobs: side must be >= 8");
  if (n_classes < 2) throw std::invalid_argument("synth_centered_blobs: need at least 2 classes");
  if (n_samples < 0) throw std::invalid_argument("synth_centered_blobs: negative sample count");

  const int window = side / 2;
  const int lo = side / 4;
  const int hi = lo + window;  // central window is [lo, hi) in both axes
  const double mid = 0.5 * (lo + hi - 1);
  const double radius = window / 4.0;
  const double sigma = window / 4.0;

  Dataset data;
  data.num_classes = n_classes;
  data.features.resize(n_samples, side * side);
  data.labels.resize(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    const int label = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_classes)));
    data.labels[static_cast<std::size_t>(s)] = label;
    const double angle = 2.0 * std::numbers::pi * label / n_classes;
    // class bump on a ring around the window centre
    const double cy = mid + radius * std::sin(angle) + (rng.uniform() - 0.5);
    const double cx = mid + radius * std::cos(angle) + (rng.uniform() - 0.5);
    const double amp = 0.5 + 0.5 * rng.uniform();
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        double v = 0.02 * rng.uniform();
        if (y >= lo && y < hi && x >= lo && x < hi) {
          const double dc = (y - cy) * (y - cy) + (x - cx) * (x - cx);
          v += amp * std::exp(-dc / (2 * sigma * sigma));
        }
        data.features(s, y * side + x) = std::min(v, 1.0);
      }
    }
  }
  return data;
}

}  // namespace sparselut
