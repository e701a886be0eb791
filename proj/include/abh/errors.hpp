#pragma once

#include <stdexcept>
#include <string>

namespace abh {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRangeMach : Error { using Error::Error; };
struct KindMismatch : Error { using Error::Error; };
struct ThresholdDegeneracy : Error { using Error::Error; };
struct NonPositiveFrequency : Error { using Error::Error; };
struct ModeAbsent : Error { using Error::Error; };
struct MatchingSingular : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct FitRange : Error { using Error::Error; };
struct PhysicalityViolation : Error { using Error::Error; };
struct TruncationTooSmall : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace abh
