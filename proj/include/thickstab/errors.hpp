#pragma once

#include <stdexcept>
#include <string>

namespace thickstab {

// Bad input: parameters out of range, mismatched grids, unknown config keys.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that ran but could not produce a trustworthy number.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thickstab
