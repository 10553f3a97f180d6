#pragma once

#include <stdexcept>
#include <string>

namespace semioverlap {

enum class ErrorKind {
  InvalidInput,
  NearTangency,
  NotClosed,
  StepCollapse,
  CurveTraceFailure,
  EndpointAtTurningPoint,
  NonMonotoneAction,
  GridTooCoarse,
  TooCloseToTurningPoint,
  OutsideClassicalRegion,
  NotBohrSommerfeld,
  AlphaZero,
  NonSimpleTurningPoint,
  TangentialIntersection,
  TangencyAtEndpoint,
  NotRealizable,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Parse/Io are input problems; everything else is a failure of the mathematics.
inline bool is_domain_error(ErrorKind kind) noexcept {
  return kind != ErrorKind::Parse && kind != ErrorKind::Io;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace semioverlap
