#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agentjudge {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A JSON document does not match the evaluation schema. `path()` is a
/// JSONPath-like pointer to the offending node, e.g. `$.eval[2].c3_response`.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)), message_(message) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string path_;
  std::string message_;
};

/// An operation was called with inputs that violate its contract.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Unknown template or a placeholder with no bound variable.
class TemplateError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class GatewayError : public Error {
 public:
  using Error::Error;
};

/// Backend failure that may succeed on retry (timeouts, 429, 5xx).
class TransientBackendError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RetryBudgetExhausted : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class MissingCredential : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// The scripted mock backend found zero or several rules for a request.
class UnmatchedMockRequest : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// LLM output could not be interpreted, even after the allowed re-ask.
class UnparseableOutput : public Error {
 public:
  using Error::Error;
};

class AllFilteredError : public Error {
 public:
  using Error::Error;
};

/// Summarization failed part-way; `completed()` chunks had been summarized.
class PartialIndexError : public Error {
 public:
  PartialIndexError(std::size_t completed, const std::string& message)
      : Error(message), completed_(completed) {}

  std::size_t completed() const noexcept { return completed_; }

 private:
  std::size_t completed_;
};

class DatasetError : public Error {
 public:
  DatasetError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class HandlerError : public Error {
 public:
  using Error::Error;
};

}  // namespace agentjudge
