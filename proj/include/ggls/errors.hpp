#pragma once

#include <stdexcept>
#include <string>

namespace ggls {

/// Base class for all library errors. The message starts with the name of
/// the module that raised it, e.g. "data: dimension mismatch".
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid hyperparameter or command configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file, inconsistent labels, or shape mismatch in data.
class DataFormatError : public Error {
  public:
    using Error::Error;
};

/// Non-finite values or numerically invalid inputs to a kernel/matrix op.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// A subspace basis whose columns are not orthonormal.
class InvalidSubspaceError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// The projection solve failed even after jitter regularization.
class SingularSystemError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Evaluation requested without the required ground-truth labels.
class EvalError : public Error {
  public:
    using Error::Error;
};

} // namespace ggls
