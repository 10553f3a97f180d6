#include "semioverlap/errors.hpp"

namespace semioverlap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NearTangency: return "NearTangency";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::StepCollapse: return "StepCollapse";
    case ErrorKind::CurveTraceFailure: return "CurveTraceFailure";
    case ErrorKind::EndpointAtTurningPoint: return "EndpointAtTurningPoint";
    case ErrorKind::NonMonotoneAction: return "NonMonotoneAction";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::TooCloseToTurningPoint: return "TooCloseToTurningPoint";
    case ErrorKind::OutsideClassicalRegion: return "OutsideClassicalRegion";
    case ErrorKind::NotBohrSommerfeld: return "NotBohrSommerfeld";
    case ErrorKind::AlphaZero: return "AlphaZero";
    case ErrorKind::NonSimpleTurningPoint: return "NonSimpleTurningPoint";
    case ErrorKind::TangentialIntersection: return "TangentialIntersection";
    case ErrorKind::TangencyAtEndpoint: return "TangencyAtEndpoint";
    case ErrorKind::NotRealizable: return "NotRealizable";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace semioverlap
