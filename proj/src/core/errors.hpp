#pragma once

#include <stdexcept>
#include <string>

namespace idsa {

// Base of every error raised by the core. The C layer maps each subclass to
// one status code, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: mismatched groups, empty domains, bad parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A computation has no meaningful result for this input, e.g. the
// shrunk volume U_{j,R} is empty.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Eigensolver failure or tolerance breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A stated hypothesis of a check does not hold (residual too large,
// vectors not orthonormal, entrywise perturbation above epsilon, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Construction-time validation of a user supplied rule or table failed
// (asymmetric kernel, non-invariant cover, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace idsa
