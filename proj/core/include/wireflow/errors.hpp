#ifndef WIREFLOW_ERRORS_HPP
#define WIREFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wireflow {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value or combination of values violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unrecognized input (JSON syntax, unknown keys, bad enum names).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File system failure while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The constraint Gram matrix is numerically singular, so the tangential
/// multipliers are not computable (curve close to a straight segment).
class DegeneratePiError : public Error {
 public:
  using Error::Error;
};

/// A linear solve failed its diagonal-dominance guard or residual contract.
class SolverFailureError : public Error {
 public:
  using Error::Error;
};

/// Requested explicit time step exceeds the stability bound.
class StabilityViolationError : public Error {
 public:
  using Error::Error;
};

/// An iterative method exhausted its iteration budget without converging.
class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Newton matrix is singular to working precision (degenerate critical point).
class SingularJacobianError : public Error {
 public:
  using Error::Error;
};

/// Too few usable trajectory points for a tail fit.
class InsufficientTailError : public Error {
 public:
  using Error::Error;
};

}  // namespace wireflow

#endif  // WIREFLOW_ERRORS_HPP
