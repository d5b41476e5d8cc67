#pragma once

#include <stdexcept>
#include <string>

namespace stc {

// Validation failures: bad arguments, malformed files, violated preconditions.
// The CLI maps these to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParameterError : InputError {
  using InputError::InputError;
};
struct ShapeError : InputError {
  using InputError::InputError;
};
struct ParseError : InputError {
  using InputError::InputError;
};
struct IoError : InputError {
  using InputError::InputError;
};

// Solver breakdowns: non-convergence, indefinite matrices. Exit code 2.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stc
