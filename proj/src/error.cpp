#include "symm/error.hpp"

namespace symm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::EmptyMesh: return "EmptyMesh";
  case ErrorCode::DegenerateBoundingSphere: return "DegenerateBoundingSphere";
  case ErrorCode::NoArea: return "NoArea";
  case ErrorCode::EmptyCloud: return "EmptyCloud";
  case ErrorCode::DegenerateCloud: return "DegenerateCloud";
  case ErrorCode::AntipodalAmbiguity: return "AntipodalAmbiguity";
  case ErrorCode::InitialDirectionRejected: return "InitialDirectionRejected";
  case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
  case ErrorCode::SchemaError: return "SchemaError";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

} // namespace symm
