#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kpo {

enum class ErrorCode {
  NotFound,
  KindError,
  ParseError,
  AlphabetError,
  DanglingEdge,
  ShapeError,
  EmptyInput,
  EmptyCategory,
  CorruptionExhausted,
  DivergenceError,
  DegenerateVector,
  DomainError,
  IoError,
  AdapterError,
  IncomparableReports,
  MissingArtifact,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library surfaces as kpo::Error. Row-level parse
// failures carry the 1-based line number of the offending row.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace kpo
