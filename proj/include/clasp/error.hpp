#pragma once

#include <stdexcept>
#include <string>

namespace clasp {

// Numeric values are part of the C ABI (see clasp.h); append only.
enum class ErrorCode : int {
    Ok = 0,
    InvalidArgument = 1,
    DimensionTooSmall = 2,
    BadMagic = 3,
    VersionMismatch = 4,
    CorruptHeader = 5,
    ZeroNormFeature = 6,
    TruncatedPayload = 7,
    IoFailure = 8,
    ConvergenceFailure = 9,
    TooFewEigenvalues = 10,
    BadBeta = 11,
    SingleCluster = 12,
    BadK = 13,
    DimensionMismatch = 14,
    PixelBudgetExceeded = 15,
    MissingImageForCrf = 16,
    TooManyLabels = 17,
    CannotPlaceCenters = 18,
    BadShape = 19,
    NonFiniteFeature = 20,
    TooFewPatches = 21,
    DecodeFailure = 22,
    Internal = 99,
};

const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace clasp
