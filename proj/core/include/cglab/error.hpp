#pragma once

#include <stdexcept>
#include <string>

namespace cglab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the region where an object is defined (x outside the
/// truncated domain, nonpositive entropy argument, nonpositive constant...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Second-difference query too close to the end of a tabulated grid.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Input that violates a structural precondition (asymmetric matrix,
/// mismatched sizes, odd length...).
class InputError : public Error {
 public:
  using Error::Error;
};

class InsufficientGridError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or iterative solver failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double location);
  double location() const noexcept { return location_; }

 private:
  double location_;
};

class UnboundedError : public Error {
 public:
  using Error::Error;
};

class EmptyFamilyError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double violation);
  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

class BlowUpError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace cglab
