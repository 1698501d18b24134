#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssql {

enum class ErrorCode {
    FileNotFound,
    MalformedSchemaFile,
    UnknownDbId,
    SyntaxError,
    UnknownTable,
    UnknownColumn,
    AmbiguousColumn,
    UnsupportedSelfJoin,
    UnresolvedReference,
    DisconnectedTerminals,
    UnknownFusedToken,
    InvalidScore,
    ScorerFailure,
    MissingLabel,
    MalformedBeamFile,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::MalformedSchemaFile: return "MalformedSchemaFile";
        case ErrorCode::UnknownDbId: return "UnknownDbId";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownTable: return "UnknownTable";
        case ErrorCode::UnknownColumn: return "UnknownColumn";
        case ErrorCode::AmbiguousColumn: return "AmbiguousColumn";
        case ErrorCode::UnsupportedSelfJoin: return "UnsupportedSelfJoin";
        case ErrorCode::UnresolvedReference: return "UnresolvedReference";
        case ErrorCode::DisconnectedTerminals: return "DisconnectedTerminals";
        case ErrorCode::UnknownFusedToken: return "UnknownFusedToken";
        case ErrorCode::InvalidScore: return "InvalidScore";
        case ErrorCode::ScorerFailure: return "ScorerFailure";
        case ErrorCode::MissingLabel: return "MissingLabel";
        case ErrorCode::MalformedBeamFile: return "MalformedBeamFile";
    }
    return "Unknown";
}

/// Library-wide error. `position` is a byte offset into the offending text
/// for syntax errors, or a line number for file-level errors (0 if unused).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::size_t position = 0)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          position_(position) {}

    ErrorCode code() const noexcept { return code_; }
    std::size_t position() const noexcept { return position_; }

private:
    ErrorCode code_;
    std::size_t position_;
};

} // namespace ssql
