#pragma once

#include <stdexcept>
#include <string>

namespace exo {

// Base of every error raised by the library. The CLI maps each leaf type to a
// process exit code (see tools/exoassist.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented precondition or type invariant.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// NaN or infinity reached a numerical routine.
class NonFiniteInput : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input CSV does not match the replay schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Gain search where every grid point violates the accuracy constraint.
class NoFeasiblePoint : public Error {
 public:
  using Error::Error;
};

}  // namespace exo
