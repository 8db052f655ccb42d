#pragma once

#include <stdexcept>
#include <string>

namespace harmonica {

enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  MalformedVertex,
  MalformedFace,
  IndexOutOfRange,
  DegenerateTriangle,
  NonManifold,
  SingularSystem,
  InvalidBeta,
  InvalidHandles,
  BlendCancellation,
  PartitionMismatch,
  Scenario,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception. `line` is the
// 1-based source line for parse errors and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int line = 0);

  ErrorCode code() const noexcept { return code_; }
  int line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  int line_;
};

}  // namespace harmonica
