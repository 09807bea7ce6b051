#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stc {

enum class ErrorCode {
  MalformedRecord,
  MissingField,
  EmptyCorpusAfterFiltering,
  EmptyFieldCorpus,
  EmptyTrainingCorpus,
  NonFiniteLoss,
  EmptyQueryAfterOov,
  DimensionMismatch,
  EmptyQuery,
  EmptyCandidatePool,
  IoFailure,
  ChecksumMismatch,
  UnsupportedVersion,
  CountMismatch,
  CorruptBundle,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::EmptyCorpusAfterFiltering: return "EmptyCorpusAfterFiltering";
    case ErrorCode::EmptyFieldCorpus: return "EmptyFieldCorpus";
    case ErrorCode::EmptyTrainingCorpus: return "EmptyTrainingCorpus";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyQueryAfterOov: return "EmptyQueryAfterOov";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::EmptyCandidatePool: return "EmptyCandidatePool";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::CorruptBundle: return "CorruptBundle";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the engine carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace stc
