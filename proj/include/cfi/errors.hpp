#pragma once

#include <stdexcept>
#include <string>

namespace cfi {

// Base of every error raised by the library. The CLI maps all of these to
// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scenario or config: mismatched item universes, bad probabilities,
// unknown strategy names. `field` names the offending config field when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

  /// Same error with `prefix` (e.g. the file path) prepended to the message.
  ConfigError with_prefix(const std::string& prefix) const {
    ConfigError e(prefix + ": " + what());
    e.field_ = field_;
    return e;
  }

 private:
  std::string field_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An arm probability of exactly 0 or 1 where a split between arms is needed.
class DegenerateSplitError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch, or an enumeration request above the configured bound.
class SizeError : public Error {
 public:
  using Error::Error;
};

class InsufficientCandidatesError : public Error {
 public:
  using Error::Error;
};

class UnsupportedBaselineError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfi
