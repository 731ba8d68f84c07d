#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heavytail {

enum class ErrorCode {
    NotSymmetric,
    NotPositiveDefinite,
    DimensionMismatch,
    NonFinite,
    TailTooHeavy,
    DivergentIntegral,
    NotConverged,
    DegenerateData,
    SingularIterate,
    InconsistentForms,
    BetaOutOfRange,
    InvalidTheta,
    TooFewSamples,
    InvalidRho,
    InvalidDesign,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TailTooHeavy: return "TailTooHeavy";
    case ErrorCode::DivergentIntegral: return "DivergentIntegral";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::SingularIterate: return "SingularIterate";
    case ErrorCode::InconsistentForms: return "InconsistentForms";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::InvalidTheta: return "InvalidTheta";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InvalidDesign: return "InvalidDesign";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Base class for every failure raised by the library. The code lets callers
/// (the CLI in particular) map failures onto exit statuses without parsing
/// messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

    /// True for failures caused by malformed input rather than numerics.
    bool is_input_error() const noexcept
    {
        return code_ == ErrorCode::ParseError || code_ == ErrorCode::InvalidDesign ||
               code_ == ErrorCode::DimensionMismatch || code_ == ErrorCode::NotSymmetric ||
               code_ == ErrorCode::NonFinite;
    }

private:
    ErrorCode code_;
};

/// Raised when an iteration hits its cap. Carries the last diagnostics so the
/// caller can decide whether the iterate is still usable.
class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& what, int iterations, double residual, double last_value = 0.0)
        : Error(ErrorCode::NotConverged, what), iterations_(iterations), residual_(residual),
          last_value_(last_value)
    {
    }

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }
    double last_value() const noexcept { return last_value_; }

private:
    int iterations_;
    double residual_;
    double last_value_;
};

class ParseError : public Error {
public:
    /// row and column are 1-based positions in the source file (0 = unknown).
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : Error(ErrorCode::ParseError,
                "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what),
          row_(row), col_(col)
    {
    }

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

} // namespace heavytail
