#pragma once

#include <stdexcept>
#include <string>

namespace frameopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range arguments (non-finite areas, bad indices, size mismatches).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Problem file does not follow the JSON schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// The structure (or the reduced system at a given design) admits a zero-energy mode.
class MechanismError : public Error {
 public:
  using Error::Error;
};

/// A load acts on a degree of freedom that carries no stiffness at the current design.
class DanglingLoadError : public Error {
 public:
  using Error::Error;
};

/// The optimality-criteria multiplier search could not bracket the volume bound.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// The inverse-stiffness LMI needs design-independent loads.
class SelfWeightPresent : public Error {
 public:
  using Error::Error;
};

/// Factorization or solver breakdown.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace frameopt
