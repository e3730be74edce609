#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optswitch {

/// Failure categories raised by the library
enum class ErrorCode {
    NonPositiveVol,
    NonPositiveCost,
    BadInterval,
    DiscountTooSmall,
    InvalidParameter,
    DegreeOutOfRange,
    QuadratureNonConvergence,
    OutOfDomain,
    UnsupportedRegime,
    ResolventDivergence,
    InconclusiveLimit,
    UnsupportedBoundaryLimit,
    MultipleTangencies,
    BracketFailure,
    InfiniteValue,
    NonConvergence,
    OrderingViolation,
    SchemeUnstable,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a code and the name of the offending field or quantity
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string field, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + " [" + field + "]: " + detail),
          code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace optswitch
