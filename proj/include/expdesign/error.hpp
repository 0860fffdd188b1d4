#pragma once

#include <stdexcept>
#include <string>

namespace expdesign {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files (measurements, embeddings, sidecars).
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration or CLI arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation's precondition (bad dimensions, unknown
// candidate name, empty input where one is required).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Numerical failure, e.g. a kernel matrix that stays indefinite after jitter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// LLM response text that does not follow the requested format.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Transport or protocol failure talking to an LLM backend.
class LlmError : public Error {
 public:
  LlmError(const std::string& what, bool retryable, int http_status = 0)
      : Error(what), retryable_(retryable), http_status_(http_status) {}

  bool retryable() const noexcept { return retryable_; }
  int http_status() const noexcept { return http_status_; }

 private:
  bool retryable_;
  int http_status_;
};

// Retry budget spent without a usable response.
class RetryExhaustedError : public LlmError {
 public:
  explicit RetryExhaustedError(const std::string& what) : LlmError(what, false) {}
};

}  // namespace expdesign
