#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "sparselut/math/rng.hpp"
#include "sparselut/math/types.hpp"

namespace sparselut {

/// Labelled samples, one row per sample, features in [0, 1].
struct Dataset {
  RowMatrix features;
  std::vector<int> labels;
  int num_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
  bool empty() const { return features.rows() == 0; }

  /// Rows selected by `indices`, in that order.
  Dataset subset(std::span<const Eigen::Index> indices) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.num_classes == b.num_classes && a.labels == b.labels && a.features == b.features;
  }
};

struct DatasetSplits {
  Dataset train;
  Dataset test;
};

/// Reads an IDX image file (magic 0x00000803) and its label file (0x00000801).
/// Pixels are scaled by 1/256. Throws FormatError on bad magic, mismatched
/// counts or truncation.
Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// train-{images,labels} and t10k-{images,labels} IDX files from one directory.
DatasetSplits load_mnist_dir(const std::filesystem::path& dir);

/// Per-column min-max statistics fitted on a training split. apply() clamps to
/// [0, 1], so test values outside the training range saturate.
struct ColumnScaling {
  std::vector<double> min;
  std::vector<double> max;

  static ColumnScaling fit(const RowMatrix& features);
  /// (x - min) / (max - min) clamped to [0, 1]; constant columns map to 0.
  void apply(RowMatrix& features) const;
};

struct CsvDataset {
  Dataset data;
  ColumnScaling scaling;
};

/// Rows of `n_features` numbers followed by an integer label; one optional
/// header row is skipped. Features are min-max scaled with `scaling` when
/// given, otherwise with statistics fitted on this file (the training split).
/// Throws FormatError naming the offending row.
CsvDataset load_csv_dataset(const std::filesystem::path& path, int n_features, int n_classes,
                            const ColumnScaling* scaling = nullptr);

/// side x side images whose class signal lives in the central side/2 window:
/// each class owns one Gaussian bump on a ring around the window centre,
/// jittered per sample and cut off at the window edge. Every pixel also
/// carries i.i.d. noise in [0, 0.02).
/// Throws std::invalid_argument if side < 8 or n_classes < 2.
Dataset synth_centered_blobs(int n_samples, int side, int n_classes, Rng& rng);

}  // namespace sparselut
