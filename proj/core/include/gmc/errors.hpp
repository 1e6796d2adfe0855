#pragma once

#include <stdexcept>
#include <string>

namespace gmc {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failures (CLI exit code 1). Everything else is validation or
/// I/O and maps to exit code 2.
struct NumericalError : Error {
  using Error::Error;
};

/// A Cholesky pivot fell at or below the acceptance threshold; the caller
/// must regularize the covariance more strongly.
struct NotPositiveDefinite : NumericalError {
  using NumericalError::NumericalError;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct EmptyMatrix : Error {
  using Error::Error;
};

struct TooFewSignals : Error {
  using Error::Error;
};

struct TooFewUsers : Error {
  using Error::Error;
};

struct UserWithSingleRating : Error {
  using Error::Error;
};

struct InvalidFraction : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct EmptyPredictions : Error {
  using Error::Error;
};

/// Malformed input file. The message carries the path and, where known,
/// the 1-based line number.
struct ParseError : Error {
  explicit ParseError(const std::string& message) : Error(message) {}
  ParseError(const std::string& path, std::size_t line, const std::string& message)
      : Error(path + ":" + std::to_string(line) + ": " + message), line_number(line) {}
  std::size_t line_number = 0;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace gmc
