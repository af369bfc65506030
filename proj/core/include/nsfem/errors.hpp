#pragma once

#include <stdexcept>
#include <string>

namespace nsfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameters, malformed config files, inconsistent
/// experiment setups. The CLI maps this family to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. gamma > 1).
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Vector/matrix dimensions that do not fit together.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Failures of the numerics proper. The CLI maps this family to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AssemblyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Request that an operation cannot serve (e.g. dense oracle on a
/// non-symmetric operator, or above its size cap).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsfem
