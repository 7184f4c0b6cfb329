#pragma once

#include <stdexcept>
#include <string>

namespace dsg {

enum class ErrorCode {
  EmptyScenario,
  DegeneratePolyline,
  InvalidArgument,
  OutOfRange,
  IoError,
  ParseError,
  SchemaVersionMismatch,
  MissingDirection,
  EmptyMap,
  EmptyGraph,
  InvalidSchedule,
  ShapeMismatch,
  HorizonTooShort,
};

const char* to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dsg
