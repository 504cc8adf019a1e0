#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace anchored {

// Requested operation is not defined for the object it was called on
// (e.g. projecting onto an unknown solution set).
class UnsupportedOperation : public std::logic_error {
 public:
  explicit UnsupportedOperation(const std::string& what)
      : std::logic_error(what) {}
};

// A documented precondition of an operation was not met and no override
// was requested (e.g. running a stochastic method on a schedule whose
// validation verdict is negative).
class PreconditionViolation : public std::runtime_error {
 public:
  explicit PreconditionViolation(const std::string& what)
      : std::runtime_error(what) {}
};

// Iterates left the trust region (non-finite values or norm above the
// divergence bound). Carries the first offending iteration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Config file problem: parse error, missing key, or invalid value.
// Messages name the offending key or line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anchored
