#include "omnirotor/error.hpp"

namespace omnirotor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonSkewInput: return "NonSkewInput";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::InfeasibleForUnidirectional: return "InfeasibleForUnidirectional";
    case ErrorCode::NonPositiveConstant: return "NonPositiveConstant";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::GainInfeasible: return "GainInfeasible";
  }
  return "Unknown";
}

}  // namespace omnirotor
