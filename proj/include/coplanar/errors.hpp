#pragma once

#include <stdexcept>
#include <string>

namespace coplanar {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, non-positive masses, mismatched dimensions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Two bodies coincide where a pair potential is singular.
class CollisionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside of a valid domain (e.g. a time outside a trajectory).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A pair potential violates the attractive-potential hypotheses.
class PotentialSpecError : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration or unknown scenario name.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An output file cannot be created or written.
class OutputError : public Error {
 public:
  using Error::Error;
};

}  // namespace coplanar
