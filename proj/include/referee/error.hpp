#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace referee {

enum class ErrorCode {
  // configuration
  InvalidConfig,
  EmptyRoster,
  InvalidTurns,
  ModeAggregationMismatch,
  MissingSummarizer,
  DuplicateAgentId,
  UnknownPersona,
  UnknownBackend,
  EmptyContent,
  HistoryOrder,
  InvalidSweep,
  // prompting
  MalformedTemplate,
  MissingSlot,
  UnknownSlot,
  // backend
  BackendUnavailable,
  ResponseEmpty,
  Timeout,
  NoMatchingScript,
  // debate
  SummarizerFailure,
  // extraction
  UnparseableVerdict,
  OutOfRangeScore,
  // metrics
  EmptySeries,
  LengthMismatch,
  ZeroVariance,
  MissingResults,
  // datasets
  ParseError,
  SchemaViolation,
  DuplicateId,
  OutOfScale,
  // cli
  ReplayMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception. The code is
/// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace referee
