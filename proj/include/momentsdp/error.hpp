#pragma once

#include <stdexcept>
#include <string>

namespace momentsdp {

// Malformed input: bad dimensions, out-of-range indices, invalid files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact integer arithmetic left the int64 range.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Relaxation order below the minimum required by some constraint.
class OrderError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace momentsdp
