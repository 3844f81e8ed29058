#pragma once

#include <stdexcept>
#include <string>

namespace prestamo {

// Every recoverable failure in the toolkit carries one of these codes so
// callers (and the CLI exit-code mapping) can react without string matching.
enum class ErrorCode {
  DuplicateLemma,
  MalformedRow,
  NotAVerb,
  UnknownLightVerb,
  EmptySurfaceSet,
  Unreadable,
  SchemaError,
  InsufficientClasses,
  InvalidAlpha,
  EmptyText,
  RetweetRejected,
  SpanMismatch,
  AmbiguousGazetteer,
  MissingProfile,
  UndefinedRate,
  Nonconvergence,
  AllZeroDifferences,
  DisjointVocabulary,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateLemma: return "DuplicateLemma";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NotAVerb: return "NotAVerb";
    case ErrorCode::UnknownLightVerb: return "UnknownLightVerb";
    case ErrorCode::EmptySurfaceSet: return "EmptySurfaceSet";
    case ErrorCode::Unreadable: return "Unreadable";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::RetweetRejected: return "RetweetRejected";
    case ErrorCode::SpanMismatch: return "SpanMismatch";
    case ErrorCode::AmbiguousGazetteer: return "AmbiguousGazetteer";
    case ErrorCode::MissingProfile: return "MissingProfile";
    case ErrorCode::UndefinedRate: return "UndefinedRate";
    case ErrorCode::Nonconvergence: return "Nonconvergence";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::DisjointVocabulary: return "DisjointVocabulary";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace prestamo
