#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symm {

enum class ErrorCode {
  InvalidArgument,
  EmptyMesh,
  DegenerateBoundingSphere,
  NoArea,
  EmptyCloud,
  DegenerateCloud,
  AntipodalAmbiguity,
  InitialDirectionRejected,
  EmptyGroundTruth,
  ParseError,
  UnsupportedFormat,
  SchemaError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace symm
