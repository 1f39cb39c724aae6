#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acudesk {

enum class ErrorCode {
    ParseError,
    UnsupportedFormat,
    TruncatedData,
    InconsistentSeries,
    EmptyMesh,
    InvalidArgument,
    UnknownPreset,
    DegenerateLandmarks,
    UnknownLayer,
    InvalidDepth,
    UnknownId,
    Conflict,
    UnsupportedVersion,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping) can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace acudesk
