#pragma once

#include <stdexcept>
#include <string>

namespace wildcut {

// Root of every error thrown by the engine. Per-source errors are caught by
// the orchestrator and turned into drop records; everything else is fatal.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition of an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Malformed text input (JSON, TOML). Carries the byte offset when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// A decoded value violated a type invariant; field() names the culprit.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A backend could not be started or failed its handshake. Fatal for a run.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// A single backend request failed (after retries). Fails only that item.
class StageError : public Error {
 public:
  using Error::Error;
};

}  // namespace wildcut
