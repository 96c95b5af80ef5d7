#pragma once

#include <filesystem>
#include <string>

#include "sparselut/model/lut_network.hpp"

namespace sparselut {

// Binary layout, little-endian: "SLUTMDL1", u32 input_bits, u32 layer count,
// then per layer u32 n_in, n_out, fanin, act_bits, degree; quantizers
// (u32 bits, f64 lo, f64 hi) for input and output; fanin u32 indices per
// neuron; n_out x terms f64 coefficients (row-major); n_out f64 biases.

std::string serialize_model(const TrainedModel& model);
/// Throws FormatError on bad magic, truncation or inconsistent dimensions.
TrainedModel deserialize_model(const std::string& bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace sparselut
