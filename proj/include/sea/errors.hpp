#pragma once

#include <stdexcept>
#include <string>

namespace sea {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: negative probabilities, length mismatches, dependent
// constraint rows, non-SPD metrics.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Targets that no distribution on the support can reach.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Stiffness, non-convergence, ill-conditioned solves.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The constraint gradients are (numerically) dependent on the current support.
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// An identity that must hold for any correct multiplier solve was violated.
class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sea
