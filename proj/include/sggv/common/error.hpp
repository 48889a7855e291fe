#pragma once

#include <stdexcept>
#include <string>

namespace sggv {

// Base for every error raised by the toolkit. Subclasses name the failure
// category so callers (and the CLI) can map them to messages and exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid architecture, strategy parameters, dataset spec or config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape or length mismatch on data handed to an operation.
class InputError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced during a forward or backward pass.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Dataset folder, image file or checkpoint could not be read.
class LoadError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace sggv
