#pragma once

#include <stdexcept>
#include <string>

namespace rtmix {

/// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad geometry, bad configuration, unsupported options.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Factorization, convergence, or residual failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtmix
