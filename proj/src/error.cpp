#include "clasp/error.hpp"

namespace clasp {

const char* error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptHeader: return "CorruptHeader";
        case ErrorCode::ZeroNormFeature: return "ZeroNormFeature";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::TooFewEigenvalues: return "TooFewEigenvalues";
        case ErrorCode::BadBeta: return "BadBeta";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::PixelBudgetExceeded: return "PixelBudgetExceeded";
        case ErrorCode::MissingImageForCrf: return "MissingImageForCrf";
        case ErrorCode::TooManyLabels: return "TooManyLabels";
        case ErrorCode::CannotPlaceCenters: return "CannotPlaceCenters";
        case ErrorCode::BadShape: return "BadShape";
        case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
        case ErrorCode::TooFewPatches: return "TooFewPatches";
        case ErrorCode::DecodeFailure: return "DecodeFailure";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, std::string(error_name(code)) + ": " + message);
}

}  // namespace clasp
