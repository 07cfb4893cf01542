#include "crf/error.hpp"

namespace crf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::DataError: return "data-error";
    case ErrorKind::DegenerateWindow: return "degenerate-window";
    case ErrorKind::DegenerateBaseline: return "degenerate-baseline";
    case ErrorKind::IncompleteRecording: return "incomplete-recording";
    case ErrorKind::DegenerateRange: return "degenerate-range";
    case ErrorKind::DegenerateMembership: return "degenerate-membership";
    case ErrorKind::StepFailure: return "step-failure";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::DegenerateVariance: return "degenerate-variance";
    case ErrorKind::DegenerateMean: return "degenerate-mean";
    case ErrorKind::FlatCurve: return "flat-curve";
    case ErrorKind::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace crf
