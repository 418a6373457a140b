#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kava {

enum class ErrorCode {
  UnknownPrefix,
  InvalidTerm,
  SyntaxError,
  UnsupportedFeature,
  UnsupportedKeyword,
  NonTreeBlankNodes,
  EmptyScheme,
  UnknownConcept,
  CyclicScheme,
  HeaderMismatch,
  TypeError,
  DuplicateIdentifier,
  NonIncreasingTime,
  UnknownVariable,
  PredicateSyntaxError,
  MalformedManifestation,
  ForeignDialect,
  InvalidKind,
  InvalidArgument,
  UnsupportedPredicateShape,
  InsufficientSteps,
  NonPositivePhase,
  EmptyPopulation,
  UnknownParameter,
  InvertedRange,
  NoDefinedRanges,
  DuplicatePrototype,
  Io,
};

std::string_view errorCodeName(ErrorCode code);

// Every failure raised by the library carries a stable code so callers (and
// the CLI exit-status mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse error with a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message,
              ErrorCode code = ErrorCode::SyntaxError)
      : Error(code, std::to_string(line) + ":" + std::to_string(column) +
                        ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace kava
