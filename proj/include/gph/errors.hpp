#pragma once

#include <stdexcept>
#include <string>

namespace gph {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside the range an operation accepts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operands disagree in lattice, order or size.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A dense object would exceed the configured memory budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered in input data.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A numerical guard aborted the computation (divergence, non-convergence,
/// degenerate spectral cutoff).
class GuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace gph
