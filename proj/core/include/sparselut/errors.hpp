#pragma once

#include <stdexcept>

namespace sparselut {

// Caller-supplied argument violations throw std::invalid_argument directly.

/// An operation was applied to an object whose state does not allow it
/// (e.g. extracting a mask before the fan-in constraint holds).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed external input: IDX/CSV/mask/model files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A truth table or LUT cost would exceed the supported address width.
class CapacityExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace sparselut
