#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace panoclone {

// Stable error codes. The numeric values are part of the CLI/HTTP contract;
// append new codes at the end only.
enum class ErrorCode : int {
  InvalidArgument = 1,
  FormatError = 2,
  AspectError = 3,
  DegenerateAngle = 4,
  DegenerateAxis = 5,
  PoleDatum = 6,
  OnBoundary = 7,
  VertexCoincidence = 8,
  AntipodalBoundary = 9,
  CoordinateOverflow = 10,
  DegeneratePolyline = 11,
  TriangulationFailure = 12,
  OutsidePatch = 13,
  NoIntersection = 14,
  MaskOutOfBounds = 15,
  NotFound = 16,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::AspectError: return "AspectError";
    case ErrorCode::DegenerateAngle: return "DegenerateAngle";
    case ErrorCode::DegenerateAxis: return "DegenerateAxis";
    case ErrorCode::PoleDatum: return "PoleDatum";
    case ErrorCode::OnBoundary: return "OnBoundary";
    case ErrorCode::VertexCoincidence: return "VertexCoincidence";
    case ErrorCode::AntipodalBoundary: return "AntipodalBoundary";
    case ErrorCode::CoordinateOverflow: return "CoordinateOverflow";
    case ErrorCode::DegeneratePolyline: return "DegeneratePolyline";
    case ErrorCode::TriangulationFailure: return "TriangulationFailure";
    case ErrorCode::OutsidePatch: return "OutsidePatch";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::MaskOutOfBounds: return "MaskOutOfBounds";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

/// Library exception. `index` identifies the offending boundary vertex or
/// mesh vertex when the failure is local to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace panoclone
