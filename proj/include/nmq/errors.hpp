#pragma once

#include <stdexcept>
#include <string>

namespace nmq {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A density matrix (or X state) violates hermiticity/trace/positivity.
struct InvalidStateError : Error {
  using Error::Error;
};

// Bloch vector outside the unit ball.
struct InvalidBlochError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Correlation kernel requested for a spectral-density variant that has none.
struct UnsupportedKernelError : Error {
  using Error::Error;
};

// Time propagation failed; carries the time at which it happened.
struct PropagationError : Error {
  double at_time;
  PropagationError(const std::string& what, double t) : Error(what), at_time(t) {}
};

// Run configuration rejected during validation.
struct ConfigError : Error {
  using Error::Error;
};

// Interval detection fed with data that carries no usable sign information.
struct UndeterminableError : Error {
  using Error::Error;
};

// BLP measure asked for an identical (a = 0, b = 0) state pair.
struct DegeneratePairError : Error {
  using Error::Error;
};

// Choi construction requested at a time where the rate is flagged divergent.
struct DivergentPointError : Error {
  using Error::Error;
};

}  // namespace nmq
