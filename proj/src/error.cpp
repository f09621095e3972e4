#include "panelkit/error.hpp"

namespace panelkit {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::MissingCell: return "MissingCell";
        case ErrorKind::DuplicateCell: return "DuplicateCell";
        case ErrorKind::UnparsableNumber: return "UnparsableNumber";
        case ErrorKind::MalformedCsv: return "MalformedCsv";
        case ErrorKind::DoubleTransform: return "DoubleTransform";
        case ErrorKind::EmptyRegion: return "EmptyRegion";
        case ErrorKind::UnknownRegion: return "UnknownRegion";
        case ErrorKind::InsufficientDF: return "InsufficientDF";
        case ErrorKind::DegenerateWeight: return "DegenerateWeight";
        case ErrorKind::MismatchedFits: return "MismatchedFits";
        case ErrorKind::SpecMismatch: return "SpecMismatch";
        case ErrorKind::ZeroResidualSS: return "ZeroResidualSS";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::ConstantSeries: return "ConstantSeries";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

}  // namespace panelkit
