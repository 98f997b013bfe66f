#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mwlp {

enum class ErrorCode {
    NotPositiveDefinite,
    NonHermitian,
    NonFinite,
    SingularPoint,
    NonPositiveScale,
    EmptyFamily,
    ExponentOutOfRange,
    ZeroMass,
    EmptyBand,
    GridMismatch,
    OffsetNotOnGrid,
    BandTooLarge,
    DivergentFit,
    Divergent,
    HypothesisViolated,
    ZeroNorm,
    BandViolation,
    CoverageGap,
    DegenerateBump,
    ConfigInvalid,
    IoFailure,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code` is what the
// runner maps to exit codes and report entries.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mwlp
