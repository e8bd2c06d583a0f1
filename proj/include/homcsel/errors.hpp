#pragma once

#include <stdexcept>
#include <string>

namespace homcsel {

// Error families. The CLI maps each family to a distinct exit code, so new
// error types should derive from one of these rather than from Error directly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed file contents, contract violations.
struct ValidationError : Error {
  using Error::Error;
};

// Missing or unreadable/unwritable files.
struct IoError : Error {
  using Error::Error;
};

// Singular covariance and friends: the computation is well-posed but the data
// does not support it.
struct NumericalError : Error {
  using Error::Error;
};

// Base for errors that abort band elimination; the concrete type carries the
// partial result (see selection.hpp).
struct DegenerateError : Error {
  using Error::Error;
};

}  // namespace homcsel
