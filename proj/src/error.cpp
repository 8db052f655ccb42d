#include "harmonica/error.hpp"

namespace harmonica {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::MalformedVertex: return "malformed vertex";
    case ErrorCode::MalformedFace: return "malformed face";
    case ErrorCode::IndexOutOfRange: return "index out of range";
    case ErrorCode::DegenerateTriangle: return "degenerate triangle";
    case ErrorCode::NonManifold: return "non-manifold edge";
    case ErrorCode::SingularSystem: return "singular system";
    case ErrorCode::InvalidBeta: return "invalid beta";
    case ErrorCode::InvalidHandles: return "invalid handles";
    case ErrorCode::BlendCancellation: return "quaternion blend cancellation";
    case ErrorCode::PartitionMismatch: return "partition mismatch";
    case ErrorCode::Scenario: return "malformed scenario";
  }
  return "unknown error";
}

static std::string decorate(const std::string& message, int line) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

Error::Error(ErrorCode code, const std::string& message, int line)
    : std::runtime_error(decorate(message, line)), code_(code), line_(line) {}

}  // namespace harmonica
