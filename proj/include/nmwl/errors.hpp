#pragma once

#include <stdexcept>
#include <string>

namespace nmwl {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class OutOfSupport : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class DivergentExpectation : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class OptimizerFailure : public Error {
 public:
  using Error::Error;
};

class DivergentComplexity : public Error {
 public:
  using Error::Error;
};

class EqualWeightViolation : public Error {
 public:
  using Error::Error;
};

class WrongFamily : public Error {
 public:
  using Error::Error;
};

class InvalidArity : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nmwl
