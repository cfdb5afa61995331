#pragma once

#include <stdexcept>
#include <string>

namespace batchlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Caller passed inconsistent arguments (mismatched ids, bad flags).
class UsageError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

/// Configuration file or option values are invalid.
class ConfigError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

/// A value violates a domain invariant (negative time, capacity < 1, ...).
class DomainError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// Distribution fitting failed (empty or degenerate data).
class EstimationError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "estimation"; }
};

/// A policy returned a decision the simulator cannot execute.
class ProtocolViolation : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "protocol"; }
};

class InfeasibleError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "infeasible"; }
};

class InstanceTooLarge : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "too_large"; }
};

class IoError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace batchlab
