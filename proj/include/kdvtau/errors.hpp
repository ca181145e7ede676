#pragma once
// Error taxonomy. Every throwing operation documents which of these it can
// raise; all derive from Error so callers can catch the family.

#include <stdexcept>
#include <string>

namespace kdvtau {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define KDVTAU_ERROR(NAME)                                        \
  struct NAME : Error {                                           \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

// m-function domain
KDVTAU_ERROR(OnBranchCross);
KDVTAU_ERROR(OnBranchInterval);
KDVTAU_ERROR(PointOnBranchCross);
KDVTAU_ERROR(DegenerateDenominator);
KDVTAU_ERROR(MassOutOfBand);
KDVTAU_ERROR(NormalityViolated);
KDVTAU_ERROR(DuplicateMass);

// group elements
KDVTAU_ERROR(PoleHit);
KDVTAU_ERROR(OverflowGuard);
KDVTAU_ERROR(AtomsPresent);
KDVTAU_ERROR(RootsTooClose);
KDVTAU_ERROR(NoConvergence);

// tau evaluation
KDVTAU_ERROR(CoincidentPoints);
KDVTAU_ERROR(BranchViolation);
KDVTAU_ERROR(DiagonalHit);
KDVTAU_ERROR(ModdVanishes);
KDVTAU_ERROR(IllConditioned);

// flows
KDVTAU_ERROR(NotReal);
KDVTAU_ERROR(TauZero);
KDVTAU_ERROR(GridTooCoarse);

// truncated models
KDVTAU_ERROR(ZeroOnContour);
KDVTAU_ERROR(DivZero);

// differential-equation oracle
KDVTAU_ERROR(BlowUp);
KDVTAU_ERROR(TailNotFlat);

#undef KDVTAU_ERROR

}  // namespace kdvtau
