#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftfuzz {

enum class ErrorCode {
  InvalidArgument,
  NoCompleteRows,
  MissingValueInDistance,
  EmptyColumn,
  KTooLarge,
  KTooSmall,
  SampleTooSmall,
  TooFewRows,
  TooFewResiduals,
  NonPositiveSigma,
  DegenerateTable,
  EmptyInput,
  ZeroVariance,
  LengthMismatch,
  IncompatibleDrift,
  DegenerateRow,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoCompleteRows: return "NoCompleteRows";
    case ErrorCode::MissingValueInDistance: return "MissingValueInDistance";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::KTooSmall: return "KTooSmall";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::TooFewResiduals: return "TooFewResiduals";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::DegenerateTable: return "DegenerateTable";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IncompatibleDrift: return "IncompatibleDrift";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace driftfuzz
