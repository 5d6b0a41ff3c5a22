#pragma once

#include <stdexcept>
#include <string>

namespace rampsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (bad arguments, misaligned series, bad files).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A parameter combination that violates a model constraint.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Statistical estimation could not be carried out.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable observations for an estimator.
class InsufficientDataError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rampsim
