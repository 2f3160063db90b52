#pragma once

#include <stdexcept>
#include <string>

namespace gkf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed files, bad configuration keys, inconsistent datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed factorizations.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularInnovationError : public NumericalError {
 public:
  SingularInnovationError(const std::string& what, double min_pivot)
      : NumericalError(what), min_pivot_(min_pivot) {}

  double min_pivot() const noexcept { return min_pivot_; }

 private:
  double min_pivot_;
};

class GeneratorInstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gkf
