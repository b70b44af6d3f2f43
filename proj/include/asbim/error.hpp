#pragma once

#include <stdexcept>
#include <string>

namespace asbim {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input data.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, dimension mismatch, or unsupported option.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or diverging optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Input with no usable information (fully missing sequence, zero variance...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A masked reduction had no unmasked position.
class EmptySequenceError : public Error {
 public:
  using Error::Error;
};

class ImputationError : public Error {
 public:
  using Error::Error;
};

/// Training diverged; `epoch()` is the 1-based epoch where it happened.
class TrainingError : public NumericalError {
 public:
  TrainingError(const std::string& what, int epoch) : NumericalError(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Broken internal precondition (e.g. a variable from another tape).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace asbim
