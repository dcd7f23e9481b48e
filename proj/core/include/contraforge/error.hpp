#pragma once

#include <stdexcept>
#include <string>

namespace contraforge {

// Root of every error thrown by the library. The CLI maps the three direct
// subclasses below onto its exit codes (2, 3, 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration, unparseable config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model-backed provider failed (network, HTTP status, undecodable body).
class ProviderError : public Error {
 public:
  using Error::Error;
};

// A contract on data was violated: a gate rejected, an LLM answer could not
// be used, a precondition did not hold.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// I/O failure or malformed record in a record log.
class StoreError : public Error {
 public:
  StoreError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  // 1-based line number of the offending record, 0 when not line-specific.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace contraforge
