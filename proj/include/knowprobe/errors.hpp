#pragma once

#include <stdexcept>
#include <string>

namespace knowprobe {

enum class ErrorCode {
    EmptyInput,
    OutOfVocabulary,
    DimensionMismatch,
    CapabilityUnsupported,
    InvalidArgument,
    NoSubjectCandidate,
    SubjectNotLocated,
    OverlappingOccurrences,
    NoScorableTokens,
    ParseError,
    IoError,
};

/// All library failures are reported as Error; `code` identifies the class
/// of failure so callers can route recoverable cases (e.g. NoSubjectCandidate)
/// without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput:             return "EmptyInput";
        case ErrorCode::OutOfVocabulary:        return "OutOfVocabulary";
        case ErrorCode::DimensionMismatch:      return "DimensionMismatch";
        case ErrorCode::CapabilityUnsupported:  return "CapabilityUnsupported";
        case ErrorCode::InvalidArgument:        return "InvalidArgument";
        case ErrorCode::NoSubjectCandidate:     return "NoSubjectCandidate";
        case ErrorCode::SubjectNotLocated:      return "SubjectNotLocated";
        case ErrorCode::OverlappingOccurrences: return "OverlappingOccurrences";
        case ErrorCode::NoScorableTokens:       return "NoScorableTokens";
        case ErrorCode::ParseError:             return "ParseError";
        case ErrorCode::IoError:                return "IoError";
    }
    return "Unknown";
}

} // namespace knowprobe
