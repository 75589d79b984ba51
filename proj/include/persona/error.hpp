#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace persona {

// Base for every error raised by the library. Anything else escaping to the
// CLI is treated as an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or a violated precondition on data. CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad configuration or command-line usage. CLI exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Peer returned something that violates the wire contract.
class ProtocolError : public DataError {
 public:
  using DataError::DataError;
};

// Transient failure that survived the configured number of attempts.
class RetryableError : public Error {
 public:
  RetryableError(const std::string& what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempt" +
              (attempts == 1 ? "" : "s") + ")"),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class MissingKeyError : public DataError {
 public:
  explicit MissingKeyError(std::string key)
      : DataError("missing embedding for id '" + key + "'"), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// A pipeline stage was run before the stage whose output it needs.
class MissingStageError : public DataError {
 public:
  MissingStageError(const std::string& what, std::string stage)
      : DataError(what + " (run stage '" + stage + "' first)"), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace persona
