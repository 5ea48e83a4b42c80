#include "narg/error.hpp"

namespace narg {

const char *to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonHermitianResult: return "NonHermitianResult";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::MissingRenormalizedOperator: return "MissingRenormalizedOperator";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::IncompleteLog: return "IncompleteLog";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace narg
