#pragma once

#include <filesystem>

#include "sparselut/math/types.hpp"
#include "sparselut/model/lut_network.hpp"
#include "sparselut/sparsity/feature_mask.hpp"

namespace sparselut {

/// Grid side for an input layer of n_in pixels: `side` if given (side*side
/// must equal n_in), else sqrt(n_in). Throws std::invalid_argument otherwise.
int heatmap_side(int n_in, int side = 0);

/// Mean |W(i, :)| per input i of a first-layer weight matrix, as side x side.
Matrix weight_heatmap(const Matrix& first_layer_weights, int side = 0);
Matrix weight_heatmap(const TrainedModel& model, int side = 0);

/// Number of neurons each input pixel feeds, as side x side.
Matrix connectivity_heatmap(const LayerMask& first_layer, int side = 0);

/// side x side grid, one CSV row per image row.
void write_grid_csv(const Matrix& grid, const std::filesystem::path& path);

struct WindowStats {
  double center_mean = 0.0;  // mean over the central (side/2 x side/2) window
  double border_mean = 0.0;  // mean over every cell outside it
  double center_share = 0.0;  // central sum / total sum
};

WindowStats central_window_stats(const Matrix& grid);

}  // namespace sparselut
