// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace spmdperf {

// Machine-checkable failure categories.  Every operation that can reject its
// input documents which of these codes it throws.
enum class ErrorCode {
  // Model / metric errors.
  UnknownRank,
  UnknownRegion,
  UnsupportedKind,
  ZeroProgramTime,
  AllRanksExcluded,
  // Clustering errors.
  DimensionMismatch,
  EmptyInput,
  UniverseMismatch,
  // Rough-set errors.
  TooManyAttributes,
  // Profile file errors.
  ParseError,
  SchemaVersionUnsupported,
  UnresolvedRegion,
  DuplicateSample,
  // Generator errors.
  InvalidSpec,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownRank: return "UnknownRank";
    case ErrorCode::UnknownRegion: return "UnknownRegion";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::ZeroProgramTime: return "ZeroProgramTime";
    case ErrorCode::AllRanksExcluded: return "AllRanksExcluded";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::TooManyAttributes: return "TooManyAttributes";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionUnsupported: return "SchemaVersionUnsupported";
    case ErrorCode::UnresolvedRegion: return "UnresolvedRegion";
    case ErrorCode::DuplicateSample: return "DuplicateSample";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "UnknownError";
}

class AnalysisError : public std::runtime_error {
 public:
  AnalysisError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spmdperf
