#include "kpo/error.hpp"

namespace kpo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::KindError: return "KindError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AlphabetError: return "AlphabetError";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyCategory: return "EmptyCategory";
    case ErrorCode::CorruptionExhausted: return "CorruptionExhausted";
    case ErrorCode::DivergenceError: return "DivergenceError";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::AdapterError: return "AdapterError";
    case ErrorCode::IncomparableReports: return "IncomparableReports";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message, std::size_t line) {
  std::string out(to_string(code));
  if (line > 0) out += "(line " + std::to_string(line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace kpo
