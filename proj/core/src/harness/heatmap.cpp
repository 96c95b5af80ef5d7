#include "sparselut/harness/heatmap.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sparselut/harness/atomic_file.hpp"

namespace sparselut {

int heatmap_side(int n_in, int side) {
  if (side > 0) {
    if (side * side != n_in) {
      throw std::invalid_argument("heatmap: side " + std::to_string(side) + " does not match " +
                                  std::to_string(n_in) + " inputs");
    }
    return side;
  }
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_in))));
  if (s * s != n_in) {
    throw std::invalid_argument("heatmap: " + std::to_string(n_in) + " inputs is not a perfect square; pass a side");
  }
  return s;
}

Matrix weight_heatmap(const Matrix& w, int side) {
  const int s = heatmap_side(static_cast<int>(w.rows()), side);
  Matrix grid(s, s);
  for (int i = 0; i < w.rows(); ++i) grid(i / s, i % s) = w.row(i).cwiseAbs().mean();
  return grid;
}

Matrix weight_heatmap(const TrainedModel& model, int side) {
  return weight_heatmap(model.layers.front().linear_weights(), side);
}

Matrix connectivity_heatmap(const LayerMask& first_layer, int side) {
  const int s = heatmap_side(first_layer.n_in, side);
  Matrix grid(s, s);
  for (int i = 0; i < first_layer.n_in; ++i) {
    grid(i / s, i % s) = static_cast<double>(first_layer.bits.row(i).count());
  }
  return grid;
}

void write_grid_csv(const Matrix& grid, const std::filesystem::path& path) {
  std::string text;
  char buf[64];
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      if (c) text += ',';
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, grid(r, c));
      text.append(buf, p);
    }
    text += '\n';
  }
  write_file_atomic(path, text);
}

WindowStats central_window_stats(const Matrix& grid) {
  const auto side = grid.rows();
  const auto lo = side / 4;
  const auto hi = lo + side / 2;
  double center = 0.0;
  double border = 0.0;
  Eigen::Index n_center = 0;
  for (Eigen::Index r = 0; r < side; ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      if (r >= lo && r < hi && c >= lo && c < hi) {
        center += grid(r, c);
        ++n_center;
      } else {
        border += grid(r, c);
      }
    }
  }
  const auto n_border = grid.size() - n_center;
  WindowStats s;
  s.center_mean = n_center ? center / static_cast<double>(n_center) : 0.0;
  s.border_mean = n_border ? border / static_cast<double>(n_border) : 0.0;
  s.center_share = (center + border) > 0.0 ? center / (center + border) : 0.0;
  return s;
}

}  // namespace sparselut
