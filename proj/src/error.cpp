#include "acudesk/error.hpp"

namespace acudesk {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::InconsistentSeries: return "InconsistentSeries";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::UnknownLayer: return "UnknownLayer";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace acudesk
