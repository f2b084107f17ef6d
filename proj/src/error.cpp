#include "eqot/error.hpp"

namespace eqot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::GeneratorNotIsometry: return "GeneratorNotIsometry";
    case ErrorCode::GeneratorNotMeasurePreserving:
      return "GeneratorNotMeasurePreserving";
    case ErrorCode::ClosureExceedsCap: return "ClosureExceedsCap";
    case ErrorCode::QuotientNotMetric: return "QuotientNotMetric";
    case ErrorCode::NotSurjective: return "NotSurjective";
    case ErrorCode::ConditionalNotSupported: return "ConditionalNotSupported";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NotCpConcave: return "NotCpConcave";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::SectionOutsideOD: return "SectionOutsideOD";
    case ErrorCode::InfeasibleInput: return "InfeasibleInput";
    case ErrorCode::CouplingNotOptimal: return "CouplingNotOptimal";
    case ErrorCode::SamePoint: return "SamePoint";
    case ErrorCode::NoODRepresentative: return "NoODRepresentative";
    case ErrorCode::NonpositiveFunction: return "NonpositiveFunction";
    case ErrorCode::ActionNotWeightPreserving:
      return "ActionNotWeightPreserving";
    case ErrorCode::ActionNotMeasurePreserving:
      return "ActionNotMeasurePreserving";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::GroupNotKernelPreserving: return "GroupNotKernelPreserving";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Error";
}

}  // namespace eqot
