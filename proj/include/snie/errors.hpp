#pragma once

#include <stdexcept>
#include <string>

namespace snie {

/// Bad argument or shape; maps to CLI exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (NaN/Inf, divergence, singular systems); maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteError : public NumericalError {
 public:
  explicit NonFiniteError(const std::string& what, long sample = -1)
      : NumericalError(what), sample_(sample) {}
  /// Offending batch sample, or -1 when not tied to one.
  long sample() const noexcept { return sample_; }

 private:
  long sample_;
};

class SingularSystemError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergedError : public NumericalError {
 public:
  DivergedError(const std::string& what, long sample)
      : NumericalError(what), sample_(sample) {}
  long sample() const noexcept { return sample_; }

 private:
  long sample_;
};

/// Malformed file contents (dataset, checkpoint, config); maps to exit code 2.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChecksumError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

}  // namespace snie
