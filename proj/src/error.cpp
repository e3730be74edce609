#include "optswitch/error.hpp"

namespace optswitch {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveVol: return "NonPositiveVol";
    case ErrorCode::NonPositiveCost: return "NonPositiveCost";
    case ErrorCode::BadInterval: return "BadInterval";
    case ErrorCode::DiscountTooSmall: return "DiscountTooSmall";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::ResolventDivergence: return "ResolventDivergence";
    case ErrorCode::InconclusiveLimit: return "InconclusiveLimit";
    case ErrorCode::UnsupportedBoundaryLimit: return "UnsupportedBoundaryLimit";
    case ErrorCode::MultipleTangencies: return "MultipleTangencies";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::InfiniteValue: return "InfiniteValue";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::SchemeUnstable: return "SchemeUnstable";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace optswitch
