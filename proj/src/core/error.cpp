#include "error.hpp"

namespace sparsec {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::InvalidMachine: return "InvalidMachine";
        case ErrorCode::TimeBoundExceeded: return "TimeBoundExceeded";
        case ErrorCode::InvalidSymbol: return "InvalidSymbol";
        case ErrorCode::MissingPolynomial: return "MissingPolynomial";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::CyclicGraph: return "CyclicGraph";
        case ErrorCode::TooManyInputs: return "TooManyInputs";
        case ErrorCode::WeightOverflow: return "WeightOverflow";
        case ErrorCode::BadDelta: return "BadDelta";
        case ErrorCode::BudgetInfeasible: return "BudgetInfeasible";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DepthOutOfRange: return "DepthOutOfRange";
        case ErrorCode::NotUnivariate: return "NotUnivariate";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::WidthMismatch: return "WidthMismatch";
        case ErrorCode::WidthOverflow: return "WidthOverflow";
        case ErrorCode::BadPoint: return "BadPoint";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::UncoveredPattern: return "UncoveredPattern";
        case ErrorCode::CheckFailed: return "CheckFailed";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::Internal: return "InternalError";
    }
    return "UnknownError";
}

}  // namespace sparsec
