#pragma once

#include <filesystem>
#include <iosfwd>

#include "sparselut/lut/truth_table.hpp"

namespace sparselut {

// Text format:
//   LUTTBL v1 neuron=<layer>.<idx> beta=<in bits> fanin=<F> inputs=<i1,...,iF>[ out_beta=<bits>]
// followed by one "<input_code_hex> <output_code_hex>" line per row in
// ascending input order. Hex digits are lower case, zero padded to the field
// width. out_beta is written only when it differs from beta.

void write_truth_table(const TruthTable& table, std::ostream& out);
void write_truth_table(const TruthTable& table, const std::filesystem::path& path);

/// Throws FormatError with the offending line number.
TruthTable read_truth_table(std::istream& in);
TruthTable read_truth_table(const std::filesystem::path& path);

}  // namespace sparselut
