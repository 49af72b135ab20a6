#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robofruit {

enum class ErrorKind {
  NonPositiveDepth,
  NoValidDepth,
  InvalidConfig,
  WindowOutOfBounds,
  PreconditionViolated,
  DimensionMismatch,
  NotPositiveDefinite,
  EmptyTrainingSet,
  EmptyInput,
  NonPositiveLimits,
  InvalidAcceleration,
  SlotOutOfRange,
  SlotOccupied,
  IllegalStateTransition,
  RegionOutOfBounds,
  EmptyRegion,
  PunnetFull,
  ParseError,
  InconsistentTotals,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robofruit
