#pragma once

#include <stdexcept>
#include <string>

namespace cortex {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimensions do not agree with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument or configuration value is out of its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An object was used in the wrong lifecycle state (backward before forward,
/// training a frozen model, stepping an optimizer with no buffers, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Batch-norm in training mode was handed fewer than two samples.
class BatchSizeError : public Error {
 public:
  using Error::Error;
};

/// Input data on disk or in memory violates its format or invariants.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The remote decoding service failed or answered with something unusable.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace cortex
