#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmsnav {

/// Failure categories surfaced by the library. The names are stable and are
/// printed by the command-line front end.
enum class ErrorKind {
  InvalidArgument,
  InvalidTransform,
  EmptyMesh,
  DegenerateTriangle,
  ParseError,
  DegenerateConstraint,
  DegenerateTail,
  TargetOffSurface,
  NoSkinIntersection,
  GridEscapedSurface,
  DegenerateLandmarks,
  DegenerateCorrespondences,
  LandmarkMismatch,
  MissingEdge,
  StaleSnapshot,
  SingularEvaluation,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tmsnav
