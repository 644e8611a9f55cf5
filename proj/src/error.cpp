#include "flatstrip/error.hpp"

namespace flatstrip {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::InvalidFormula: return "InvalidFormula";
    case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::MapsOutsideDomain: return "MapsOutsideDomain";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularMap: return "SingularMap";
    case ErrorCode::DegenerateDilation: return "DegenerateDilation";
    case ErrorCode::DilationNotStrictlyBounded: return "DilationNotStrictlyBounded";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorCode::InconclusiveBudget: return "InconclusiveBudget";
    case ErrorCode::NotCrystallographic: return "NotCrystallographic";
    case ErrorCode::BadParameters: return "BadParameters";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NotFlat: return "NotFlat";
    case ErrorCode::NotParallel: return "NotParallel";
    case ErrorCode::NotSimplyConnected: return "NotSimplyConnected";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::NotIsometric: return "NotIsometric";
    case ErrorCode::BadLattice: return "BadLattice";
    case ErrorCode::BoundTooLarge: return "BoundTooLarge";
    case ErrorCode::NoComplement: return "NoComplement";
    case ErrorCode::CaseNotCountable: return "CaseNotCountable";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

const char* module_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDomain:
    case ErrorCode::InvalidFormula:
    case ErrorCode::StencilOutOfDomain:
    case ErrorCode::NonPositiveDensity:
    case ErrorCode::MapsOutsideDomain:
    case ErrorCode::NotPositiveDefinite:
      return "metric_core";
    case ErrorCode::SingularMap:
    case ErrorCode::DegenerateDilation:
    case ErrorCode::DilationNotStrictlyBounded:
    case ErrorCode::SolverDiverged:
    case ErrorCode::DegenerateJacobian:
      return "beltrami";
    case ErrorCode::InconclusiveBudget:
    case ErrorCode::NotCrystallographic:
    case ErrorCode::BadParameters:
      return "isogroup";
    case ErrorCode::LeftDomain:
    case ErrorCode::StepTooLarge:
    case ErrorCode::PathTooShort:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::NotFlat:
    case ErrorCode::NotParallel:
      return "geodesy";
    case ErrorCode::NotSimplyConnected:
    case ErrorCode::InsufficientOverlap:
    case ErrorCode::NotIsometric:
      return "develop";
    case ErrorCode::BadLattice:
    case ErrorCode::BoundTooLarge:
    case ErrorCode::NoComplement:
    case ErrorCode::CaseNotCountable:
      return "count";
    case ErrorCode::ParseError:
      return "cli";
  }
  return "unknown";
}

}  // namespace flatstrip
