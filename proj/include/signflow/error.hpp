#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace signflow {

enum class ErrorCode {
    InvalidArgument,
    MissingJoint,
    DimensionMismatch,
    EmptyInput,
    SymbolOutOfRange,
    DegenerateContour,
    Parse,
    Corrupt,
    Version,
    Io,
    InvalidManifest,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingJoint: return "MissingJoint";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::DegenerateContour: return "DegenerateContour";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::Version: return "Version";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    }
    return "Unknown";
}

/// Every library failure is reported through this type; code() is stable and
/// what() carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition)
        throw Error(code, message);
}

} // namespace detail
} // namespace signflow
