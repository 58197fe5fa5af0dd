#pragma once

#include <stdexcept>
#include <string>

namespace gripest {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sensor log decoding.
class ParseError : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Configuration invariant violation; field() names the offending key path.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string field, const std::string& what = {});
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};
class WindowOrderError : public Error {
 public:
  using Error::Error;
};
class StaleEventError : public Error {
 public:
  using Error::Error;
};
class StaleScanError : public StaleEventError {
 public:
  using StaleEventError::StaleEventError;
};
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};
class AliasDomainError : public Error {
 public:
  using Error::Error;
};
class GateError : public Error {
 public:
  using Error::Error;
};
class LoadDomainError : public Error {
 public:
  using Error::Error;
};
class SteeringDomainError : public Error {
 public:
  using Error::Error;
};

class TruthDivergenceError : public Error {
 public:
  explicit TruthDivergenceError(double t);
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class AlignmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace gripest
