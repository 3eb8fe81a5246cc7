#pragma once

#include <stdexcept>
#include <string>

namespace eigenspec {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values. CLI exit code 2.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed, missing or degenerate data. CLI exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// An iterative solver stopped before reaching its tolerance.
// Carries the best optimality gap reached. CLI exit code 4.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gap)
      : Error(what), gap_(gap) {}

  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

}  // namespace eigenspec
