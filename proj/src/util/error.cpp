#include "util/error.hpp"

namespace memaudit {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::Generation: return "generation error";
    case ErrorCode::Template: return "template error";
    case ErrorCode::Split: return "split error";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Transport: return "transport error";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::Training: return "training error";
    case ErrorCode::Metrics: return "metrics error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::NoArtifacts: return "no artifacts";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

ParseError::ParseError(std::size_t line, std::string content, const std::string& reason)
    : Error(ErrorCode::Parse,
            "line " + std::to_string(line) + ": " + reason + ": '" + content + "'"),
      line_(line),
      content_(std::move(content)) {}

}  // namespace memaudit
