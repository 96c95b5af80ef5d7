#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sparselut/sparsity/feature_mask.hpp"

namespace sparselut {

// SPARSELUT-MASK v1
// layers <L>
// layer <k> in <N> out <M> fanin <F>
// <F ascending input indices of neuron 0>
// ... one line per neuron, M lines per layer

/// Throws std::invalid_argument if a neuron does not hold exactly `fanin` inputs.
void write_mask(const FeatureMask& mask, std::ostream& out);
void write_mask(const FeatureMask& mask, const std::filesystem::path& path);
std::string mask_to_string(const FeatureMask& mask);

/// Canonical form is enforced: ascending, unique, in-range indices, exactly
/// `fanin` per line. Throws FormatError with the 1-based line number.
FeatureMask read_mask(std::istream& in);
FeatureMask read_mask(const std::filesystem::path& path);

}  // namespace sparselut
