#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tmsnav/geometry.hpp"
#include "tmsnav/mesh.hpp"

namespace tmsnav {

enum class ConstraintKind { FourPoint, ThreePoint, TwoPoint };

/// Names one of the plane points p, p1, p2.
enum class PlanePoint { P, P1, P2 };

enum class Strategy { FreeSkin, RestrictedCortex, ClosestSkin };

std::string_view to_string(ConstraintKind kind);
std::string_view to_string(PlanePoint point);
std::string_view to_string(Strategy strategy);
ConstraintKind constraint_kind_from_string(std::string_view s);
PlanePoint plane_point_from_string(std::string_view s);
Strategy strategy_from_string(std::string_view s);

/// Points dropped on a surface to pin down a coil pose.
///
/// FourPoint: `center` plus the plane points; the tail point is p1 or p2.
/// ThreePoint: the plane points; `center_point` names the one used as the center.
/// TwoPoint: `center` and `tail_point`; the plane comes from the mesh triangle
/// nearest to the center.
struct PoseConstraintInput {
  ConstraintKind kind = ConstraintKind::TwoPoint;
  Vec3 center = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  Vec3 p2 = Vec3::Zero();
  PlanePoint tail = PlanePoint::P1;
  PlanePoint center_point = PlanePoint::P;
  Vec3 tail_point = Vec3::Zero();

  static PoseConstraintInput four_point(const Vec3& center, const Vec3& p, const Vec3& p1,
                                        const Vec3& p2, PlanePoint tail = PlanePoint::P1);
  static PoseConstraintInput three_point(const Vec3& p, const Vec3& p1, const Vec3& p2,
                                         PlanePoint center_point, PlanePoint tail = PlanePoint::P1);
  static PoseConstraintInput two_point(const Vec3& center, const Vec3& tail_point);

  bool operator==(const PoseConstraintInput&) const = default;
};

/// A planned coil pose {H->b} in head-image coordinates. Rotation columns are
/// (x, y, n) with n the outward surface normal and y the tail direction.
struct PlanPose {
  RigidTransform pose;
  std::optional<Strategy> strategy;
  PoseConstraintInput source;
  std::optional<Vec3> cortex_target;
  /// Mesh triangle that supplied the orientation, when one did.
  std::optional<std::uint32_t> support_triangle;
  /// RestrictedCortex only: a coil footprint corner lies inside the skin.
  bool skin_collision_warning = false;

  Vec3 x_axis() const { return pose.rotation().col(0); }
  Vec3 y_axis() const { return pose.rotation().col(1); }
  Vec3 z_axis() const { return pose.rotation().col(2); }
  const Vec3& center() const { return pose.translation(); }

  bool operator==(const PlanPose&) const = default;
};

struct HotspotGrid {
  std::vector<PlanPose> poses;  // row-major
  std::size_t rows = 0;
  std::size_t cols = 0;
  double spacing_mm = 0.0;

  bool operator==(const HotspotGrid&) const = default;
};

struct PlanningOptions {
  /// TwoPoint: maximum distance from the center to the mesh.
  double max_center_offset_mm = 50.0;
  /// Rectangular coil footprint used for the skin-collision warning.
  double footprint_half_length_mm = 70.0;  // along coil x
  double footprint_half_width_mm = 35.0;   // along coil y
};

/// Frame with columns (y x n, y, n) after projecting `tail` onto the plane normal
/// to `n`. Throws DegenerateTail when the projection is shorter than 1e-9.
Mat3 frame_from_normal_and_tail(const Vec3& n, const Vec3& tail);

PlanPose pose_from_constraint(const PoseConstraintInput& input, const TriangleMesh* mesh,
                              const PlanningOptions& options = {});

PlanPose free_skin_pose(const TriangleMesh& skin, const PoseConstraintInput& input,
                        const PlanningOptions& options = {});

PlanPose restricted_cortex_pose(const TriangleMesh& cortex, const TriangleMesh& skin,
                                const PoseConstraintInput& cortex_input,
                                const PlanningOptions& options = {});

PlanPose closest_skin_pose(const TriangleMesh& cortex, const TriangleMesh& skin,
                           const PoseConstraintInput& cortex_input,
                           const PlanningOptions& options = {});

PlanPose plan(Strategy strategy, const TriangleMesh* cortex, const TriangleMesh& skin,
              const PoseConstraintInput& input, const PlanningOptions& options = {});

HotspotGrid hotspot_grid(const TriangleMesh& skin, const PlanPose& seed, std::size_t rows,
                         std::size_t cols, double spacing_mm);

struct HotspotSelection {
  std::size_t index = 0;
  PlanPose pose;
};

/// Argmax over responses; ties go to the lowest index.
HotspotSelection select_hotspot(const HotspotGrid& grid, std::span<const double> responses);

}  // namespace tmsnav
