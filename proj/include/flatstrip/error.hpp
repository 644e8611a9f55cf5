#pragma once

#include <stdexcept>
#include <string>

namespace flatstrip {

/// Failure modes reported by the library. Every code belongs to exactly one
/// module; `module_of` recovers it for reports.
enum class ErrorCode {
  // metric
  InvalidDomain,
  InvalidFormula,
  StencilOutOfDomain,
  NonPositiveDensity,
  MapsOutsideDomain,
  NotPositiveDefinite,
  // beltrami
  SingularMap,
  DegenerateDilation,
  DilationNotStrictlyBounded,
  SolverDiverged,
  DegenerateJacobian,
  // isogroup
  InconclusiveBudget,
  NotCrystallographic,
  BadParameters,
  // geodesy
  LeftDomain,
  StepTooLarge,
  PathTooShort,
  GridTooCoarse,
  NotFlat,
  NotParallel,
  // develop
  NotSimplyConnected,
  InsufficientOverlap,
  NotIsometric,
  // count
  BadLattice,
  BoundTooLarge,
  NoComplement,
  CaseNotCountable,
  // io / cli
  ParseError,
};

const char* to_string(ErrorCode code) noexcept;
const char* module_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* module() const noexcept { return module_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace flatstrip
