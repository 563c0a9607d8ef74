#pragma once

#include <stdexcept>
#include <string>

namespace clpaths {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures map to CLI exit code 1.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid input (densities, configs, paths) maps to CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class InvalidDensity : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class SingularityTooClose : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Overflow : public NumericalError {
 public:
  Overflow(const std::string& what, double log_abs)
      : NumericalError(what), log_abs_(log_abs) {}
  double log_abs() const { return log_abs_; }

 private:
  double log_abs_;
};

class NoDecay : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureFail : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotStabilized : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Runaway : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularHit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficientBasis : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CurveTooClose : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace clpaths
