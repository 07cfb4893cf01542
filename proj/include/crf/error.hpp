#pragma once

#include <stdexcept>
#include <string>

namespace crf {

enum class ErrorKind {
  InvalidConfig,
  DataError,
  DegenerateWindow,
  DegenerateBaseline,
  IncompleteRecording,
  DegenerateRange,
  DegenerateMembership,
  StepFailure,
  Divergence,
  DegenerateVariance,
  DegenerateMean,
  FlatCurve,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace crf
