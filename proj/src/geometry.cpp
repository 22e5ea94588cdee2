#include "tmsnav/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "tmsnav/error.hpp"

namespace tmsnav {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "InvalidArgument";
    case ErrorKind::InvalidTransform:
      return "InvalidTransform";
    case ErrorKind::EmptyMesh:
      return "EmptyMesh";
    case ErrorKind::DegenerateTriangle:
      return "DegenerateTriangle";
    case ErrorKind::ParseError:
      return "ParseError";
    case ErrorKind::DegenerateConstraint:
      return "DegenerateConstraint";
    case ErrorKind::DegenerateTail:
      return "DegenerateTail";
    case ErrorKind::TargetOffSurface:
      return "TargetOffSurface";
    case ErrorKind::NoSkinIntersection:
      return "NoSkinIntersection";
    case ErrorKind::GridEscapedSurface:
      return "GridEscapedSurface";
    case ErrorKind::DegenerateLandmarks:
      return "DegenerateLandmarks";
    case ErrorKind::DegenerateCorrespondences:
      return "DegenerateCorrespondences";
    case ErrorKind::LandmarkMismatch:
      return "LandmarkMismatch";
    case ErrorKind::MissingEdge:
      return "MissingEdge";
    case ErrorKind::StaleSnapshot:
      return "StaleSnapshot";
    case ErrorKind::SingularEvaluation:
      return "SingularEvaluation";
  }
  return "Unknown";
}

namespace {

constexpr double kDriftTolerance = 1e-12;

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorKind::InvalidTransform, "non-finite transform entries");
  }
  if (!is_proper_rotation(rotation)) {
    throw Error(ErrorKind::InvalidTransform, "rotation is not orthonormal with det +1 (error " +
                                                 std::to_string(orthonormality_error()) + ")");
  }
}

RigidTransform RigidTransform::from_translation(const Vec3& t) {
  return RigidTransform(Unchecked{}, Mat3::Identity(), t);
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle_rad,
                                               const Vec3& translation) {
  const double norm = axis.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "rotation axis must be non-zero");
  }
  Mat3 r = Eigen::AngleAxisd(angle_rad, axis / norm).toRotationMatrix();
  return RigidTransform(r, translation);
}

RigidTransform RigidTransform::from_row_major(const std::array<double, 16>& m) {
  constexpr double kRowTolerance = 1e-12;
  if (std::abs(m[12]) > kRowTolerance || std::abs(m[13]) > kRowTolerance ||
      std::abs(m[14]) > kRowTolerance || std::abs(m[15] - 1.0) > kRowTolerance) {
    throw Error(ErrorKind::InvalidTransform, "homogeneous bottom row must be (0, 0, 0, 1)");
  }
  Mat3 r;
  Vec3 t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = m[static_cast<std::size_t>(4 * i + j)];
    t(i) = m[static_cast<std::size_t>(4 * i + 3)];
  }
  return RigidTransform(r, t);
}

std::array<double, 16> RigidTransform::to_row_major() const {
  std::array<double, 16> m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[static_cast<std::size_t>(4 * i + j)] = rotation_(i, j);
    m[static_cast<std::size_t>(4 * i + 3)] = translation_(i);
  }
  m[15] = 1.0;
  return m;
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

double RigidTransform::orthonormality_error() const {
  return max_abs(rotation_.transpose() * rotation_ - Mat3::Identity());
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Mat3 r = a.rotation_ * b.rotation_;
  if (max_abs(r.transpose() * r - Mat3::Identity()) > kDriftTolerance) {
    r = nearest_rotation(r);
  }
  return RigidTransform(RigidTransform::Unchecked{}, r,
                        a.rotation_ * b.translation_ + a.translation_);
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation_.transpose();
  return RigidTransform(RigidTransform::Unchecked{}, rt, -(rt * t.translation_));
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

double rotation_angle(const Mat3& r) {
  const double cos_part = 0.5 * (r.trace() - 1.0);
  const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_part = 0.5 * skew.norm();
  // Same angle as acos(clamp(cos_part)), without the loss of precision near 0.
  return std::atan2(sin_part, cos_part);
}

bool is_proper_rotation(const Mat3& r, double tolerance) {
  if (!r.allFinite()) return false;
  if (max_abs(r.transpose() * r - Mat3::Identity()) > tolerance) return false;
  return std::abs(r.determinant() - 1.0) <= tolerance;
}

}  // namespace tmsnav
