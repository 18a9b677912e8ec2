#pragma once

#include <stdexcept>
#include <string>

namespace netform {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: invalid dyad, size mismatch, out-of-domain parameter.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested exhaustive operation would exceed the configured state cap.
class StateSpaceOverflow : public Error {
 public:
  using Error::Error;
};

/// A switching probability evaluated to exactly 0 or 1.
class DegenerateProbability : public Error {
 public:
  using Error::Error;
};

/// A numerical routine (linear solve, quadrature, optimizer) failed to meet
/// its stated accuracy.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace netform
