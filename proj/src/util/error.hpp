#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memaudit {

// Numeric values are part of the C ABI (see include/memaudit/memaudit.h).
enum class ErrorCode : int {
  Parse = 1,
  Validation = 2,
  Generation = 3,
  Template = 4,
  Split = 5,
  Config = 6,
  Transport = 7,
  Schema = 8,
  Training = 9,
  Metrics = 10,
  Io = 11,
  NoArtifacts = 12,
  InvalidArgument = 13,
  Internal = 14,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string content, const std::string& reason);
  std::size_t line() const noexcept { return line_; }
  const std::string& content() const noexcept { return content_; }

 private:
  std::size_t line_;
  std::string content_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, const std::string& what)
      : Error(ErrorCode::Validation, what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts, int http_status)
      : Error(ErrorCode::Transport, what), attempts_(attempts), http_status_(http_status) {}
  // Total attempts made, including retries.
  int attempts() const noexcept { return attempts_; }
  // 0 when no HTTP response was received.
  int http_status() const noexcept { return http_status_; }

 private:
  int attempts_;
  int http_status_;
};

}  // namespace memaudit
