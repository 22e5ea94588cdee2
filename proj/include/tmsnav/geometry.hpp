#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>

namespace tmsnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Proper rigid motion x -> R x + t. Translations are in millimeters.
///
/// Every frame-to-frame relation in the navigation chain is one of these. The
/// transform named {A->B} is the pose of frame B expressed in frame A, so it maps
/// B-coordinates to A-coordinates and {A->C} = {A->B} * {B->C}.
class RigidTransform {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws InvalidTransform unless `rotation` is a proper rotation within 1e-9.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t);
  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& translation = Vec3::Zero());

  /// Row-major 4x4 homogeneous matrix; the bottom row must be (0, 0, 0, 1).
  static RigidTransform from_row_major(const std::array<double, 16>& m);
  std::array<double, 16> to_row_major() const;
  Mat4 matrix() const;

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }
  Vec3 apply_vector(const Vec3& v) const { return rotation_ * v; }

  /// Max-norm of R^T R - I.
  double orthonormality_error() const;

  bool operator==(const RigidTransform&) const = default;

 private:
  struct Unchecked {};
  RigidTransform(Unchecked, const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  friend RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
  friend RigidTransform invert(const RigidTransform& t);

  Mat3 rotation_;
  Vec3 translation_;
};

/// a * b: applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

/// Nearest rotation in the Frobenius sense (polar factor with det = +1).
Mat3 nearest_rotation(const Mat3& m);

/// Rotation angle in [0, pi] of a rotation matrix.
double rotation_angle(const Mat3& r);

bool is_proper_rotation(const Mat3& r, double tolerance = RigidTransform::kOrthonormalTolerance);

}  // namespace tmsnav
