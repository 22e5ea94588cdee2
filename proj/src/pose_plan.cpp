#include "tmsnav/pose_plan.hpp"

#include <array>
#include <cmath>
#include <string>

#include "tmsnav/error.hpp"

namespace tmsnav {

namespace {

constexpr double kTailTolerance = 1e-9;
constexpr double kCollinearSine = 1e-9;

const Vec3& plane_point(const PoseConstraintInput& in, PlanePoint which) {
  switch (which) {
    case PlanePoint::P:
      return in.p;
    case PlanePoint::P1:
      return in.p1;
    case PlanePoint::P2:
      return in.p2;
  }
  return in.p;
}

Vec3 plane_normal(const Vec3& p, const Vec3& p1, const Vec3& p2) {
  const Vec3 a = p1 - p;
  const Vec3 b = p2 - p;
  const Vec3 n = a.cross(b);
  const double norm = n.norm();
  if (!(norm > kCollinearSine * a.norm() * b.norm()) || !(norm > 0.0)) {
    throw Error(ErrorKind::DegenerateConstraint, "plane points are collinear or coincident");
  }
  return n / norm;
}

bool footprint_hits_skin(const TriangleMesh& skin, const RigidTransform& pose,
                         const PlanningOptions& options) {
  const Vec3 x = pose.rotation().col(0) * options.footprint_half_length_mm;
  const Vec3 y = pose.rotation().col(1) * options.footprint_half_width_mm;
  const Vec3& c = pose.translation();
  const std::array<Vec3, 4> corners{Vec3(c + x + y), Vec3(c + x - y), Vec3(c - x + y),
                                    Vec3(c - x - y)};
  for (const Vec3& corner : corners) {
    if (is_inside(skin, corner)) return true;
  }
  return false;
}

// Surface marching in fixed steps: step along the tangent direction, snap back to
// the closest surface point, and carry the direction into the new tangent plane.
struct SurfaceWalker {
  const TriangleMesh& mesh;
  Vec3 point;
  Vec3 direction;
  Vec3 normal;
  std::uint32_t triangle_id = 0;

  void turn_to(const Vec3& d) { direction = d.normalized(); }

  /// Signed distance: negative walks against `direction`, which keeps its sense.
  void walk(double distance, double step) {
    const double sign = distance < 0.0 ? -1.0 : 1.0;
    direction *= sign;
    distance = std::abs(distance);
    const auto full = static_cast<int>(std::floor(distance / step + 1e-9));
    const double first = distance - full * step;
    if (first > 1e-9 * step) advance(first);
    for (int k = 0; k < full; ++k) advance(step);
    direction *= sign;
  }

  void advance(double length) {
    const SurfaceHit hit = closest_point(mesh, point + length * direction);
    point = hit.point;
    triangle_id = hit.triangle_id;
    normal = triangle_normal(mesh, hit.triangle_id);
    const Vec3 tangential = direction - direction.dot(normal) * normal;
    if (tangential.norm() > 1e-9) direction = tangential.normalized();
  }
};

}  // namespace

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::FourPoint:
      return "four_point";
    case ConstraintKind::ThreePoint:
      return "three_point";
    case ConstraintKind::TwoPoint:
      return "two_point";
  }
  return "two_point";
}

std::string_view to_string(PlanePoint point) {
  switch (point) {
    case PlanePoint::P:
      return "p";
    case PlanePoint::P1:
      return "p1";
    case PlanePoint::P2:
      return "p2";
  }
  return "p";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::FreeSkin:
      return "free_skin";
    case Strategy::RestrictedCortex:
      return "restricted_cortex";
    case Strategy::ClosestSkin:
      return "closest_skin";
  }
  return "free_skin";
}

ConstraintKind constraint_kind_from_string(std::string_view s) {
  if (s == "four_point") return ConstraintKind::FourPoint;
  if (s == "three_point") return ConstraintKind::ThreePoint;
  if (s == "two_point") return ConstraintKind::TwoPoint;
  throw Error(ErrorKind::InvalidArgument, "unknown constraint kind '" + std::string(s) + "'");
}

PlanePoint plane_point_from_string(std::string_view s) {
  if (s == "p") return PlanePoint::P;
  if (s == "p1") return PlanePoint::P1;
  if (s == "p2") return PlanePoint::P2;
  throw Error(ErrorKind::InvalidArgument, "unknown plane point '" + std::string(s) + "'");
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "free_skin") return Strategy::FreeSkin;
  if (s == "restricted_cortex") return Strategy::RestrictedCortex;
  if (s == "closest_skin") return Strategy::ClosestSkin;
  throw Error(ErrorKind::InvalidArgument, "unknown strategy '" + std::string(s) + "'");
}

PoseConstraintInput PoseConstraintInput::four_point(const Vec3& center, const Vec3& p,
                                                    const Vec3& p1, const Vec3& p2,
                                                    PlanePoint tail) {
  PoseConstraintInput in;
  in.kind = ConstraintKind::FourPoint;
  in.center = center;
  in.p = p;
  in.p1 = p1;
  in.p2 = p2;
  in.tail = tail;
  return in;
}

PoseConstraintInput PoseConstraintInput::three_point(const Vec3& p, const Vec3& p1, const Vec3& p2,
                                                     PlanePoint center_point, PlanePoint tail) {
  PoseConstraintInput in;
  in.kind = ConstraintKind::ThreePoint;
  in.p = p;
  in.p1 = p1;
  in.p2 = p2;
  in.center_point = center_point;
  in.tail = tail;
  in.center = plane_point(in, center_point);
  return in;
}

PoseConstraintInput PoseConstraintInput::two_point(const Vec3& center, const Vec3& tail_point) {
  PoseConstraintInput in;
  in.kind = ConstraintKind::TwoPoint;
  in.center = center;
  in.tail_point = tail_point;
  return in;
}

Mat3 frame_from_normal_and_tail(const Vec3& n, const Vec3& tail) {
  const Vec3 tangential = tail - tail.dot(n) * n;
  const double norm = tangential.norm();
  if (!(norm >= kTailTolerance)) {
    throw Error(ErrorKind::DegenerateTail, "tail direction is parallel to the surface normal");
  }
  const Vec3 y = tangential / norm;
  Mat3 r;
  r.col(0) = y.cross(n);
  r.col(1) = y;
  r.col(2) = n;
  return r;
}

PlanPose pose_from_constraint(const PoseConstraintInput& input, const TriangleMesh* mesh,
                              const PlanningOptions& options) {
  PlanPose out;
  out.source = input;

  if (input.kind == ConstraintKind::TwoPoint) {
    if (mesh == nullptr) {
      throw Error(ErrorKind::InvalidArgument, "two-point constraint requires a mesh");
    }
    const SurfaceHit hit = closest_point(*mesh, input.center);
    if (hit.ray_parameter > options.max_center_offset_mm) {
      throw Error(ErrorKind::TargetOffSurface,
                  "center is " + std::to_string(hit.ray_parameter) + " mm from the mesh (bound " +
                      std::to_string(options.max_center_offset_mm) + " mm)");
    }
    const auto [v0, v1, v2] = mesh->triangle_vertices(hit.triangle_id);
    const Vec3 n = plane_normal(v0, v1, v2);
    const Mat3 r = frame_from_normal_and_tail(n, input.tail_point - input.center);
    out.pose = RigidTransform(r, hit.point);
    out.support_triangle = hit.triangle_id;
    return out;
  }

  if (input.tail == PlanePoint::P) {
    throw Error(ErrorKind::InvalidArgument, "tail point must be p1 or p2");
  }
  const Vec3 n = plane_normal(input.p, input.p1, input.p2);
  const Mat3 r = frame_from_normal_and_tail(n, plane_point(input, input.tail) - input.p);
  const Vec3 center = input.kind == ConstraintKind::ThreePoint
                          ? plane_point(input, input.center_point)
                          : input.center;
  out.pose = RigidTransform(r, center);
  return out;
}

PlanPose free_skin_pose(const TriangleMesh& skin, const PoseConstraintInput& input,
                        const PlanningOptions& options) {
  PlanPose out = pose_from_constraint(input, &skin, options);
  out.strategy = Strategy::FreeSkin;
  return out;
}

PlanPose restricted_cortex_pose(const TriangleMesh& cortex, const TriangleMesh& skin,
                                const PoseConstraintInput& cortex_input,
                                const PlanningOptions& options) {
  const PlanPose target = pose_from_constraint(cortex_input, &cortex, options);
  const Vec3 n = target.z_axis();
  const auto hit = ray_intersect(skin, target.center(), n);
  if (!hit) {
    throw Error(ErrorKind::NoSkinIntersection, "outward cortex normal does not reach the skin");
  }
  PlanPose out;
  out.source = cortex_input;
  out.strategy = Strategy::RestrictedCortex;
  out.cortex_target = target.center();
  out.support_triangle = target.support_triangle;
  out.pose = RigidTransform(target.pose.rotation(), hit->point);
  out.skin_collision_warning = footprint_hits_skin(skin, out.pose, options);
  return out;
}

PlanPose closest_skin_pose(const TriangleMesh& cortex, const TriangleMesh& skin,
                           const PoseConstraintInput& cortex_input,
                           const PlanningOptions& options) {
  const PlanPose target = pose_from_constraint(cortex_input, &cortex, options);
  const SurfaceHit hit = closest_point(skin, target.center());
  const Vec3 n = triangle_normal(skin, hit.triangle_id);
  PlanPose out;
  out.source = cortex_input;
  out.strategy = Strategy::ClosestSkin;
  out.cortex_target = target.center();
  out.support_triangle = hit.triangle_id;
  out.pose = RigidTransform(frame_from_normal_and_tail(n, target.y_axis()), hit.point);
  return out;
}

PlanPose plan(Strategy strategy, const TriangleMesh* cortex, const TriangleMesh& skin,
              const PoseConstraintInput& input, const PlanningOptions& options) {
  if (strategy == Strategy::FreeSkin) return free_skin_pose(skin, input, options);
  if (cortex == nullptr) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(to_string(strategy)) + " requires a cortex mesh");
  }
  if (strategy == Strategy::RestrictedCortex) {
    return restricted_cortex_pose(*cortex, skin, input, options);
  }
  return closest_skin_pose(*cortex, skin, input, options);
}

HotspotGrid hotspot_grid(const TriangleMesh& skin, const PlanPose& seed, std::size_t rows,
                         std::size_t cols, double spacing_mm) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least one row and one column");
  }
  if (!(spacing_mm > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid spacing must be > 0");

  HotspotGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.spacing_mm = spacing_mm;
  grid.poses.reserve(rows * cols);

  const Vec3 x = seed.x_axis();
  const Vec3 y = seed.y_axis();
  const double row_mid = 0.5 * static_cast<double>(rows - 1);
  const double col_mid = 0.5 * static_cast<double>(cols - 1);

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double along_x = (static_cast<double>(j) - col_mid) * spacing_mm;
      const double along_y = (static_cast<double>(i) - row_mid) * spacing_mm;
      if (along_x == 0.0 && along_y == 0.0) {
        grid.poses.push_back(seed);
        continue;
      }
      const Vec3 lattice = seed.center() + along_x * x + along_y * y;
      const double escape = closest_point(skin, lattice).ray_parameter;
      if (escape > 2.0 * spacing_mm) {
        throw Error(ErrorKind::GridEscapedSurface,
                    "grid cell (" + std::to_string(i) + ", " + std::to_string(j) + ") is " +
                        std::to_string(escape) + " mm from the skin");
      }
      // Walk along y, then along x, so neighbor spacing is measured on the surface
      // rather than in the seed's tangent plane.
      SurfaceWalker walker{skin, seed.center(), y, seed.z_axis()};
      walker.walk(along_y, spacing_mm);
      walker.turn_to(walker.direction.cross(walker.normal));
      walker.walk(along_x, spacing_mm);

      PlanPose pose;
      pose.strategy = seed.strategy;
      pose.source = PoseConstraintInput::two_point(walker.point, walker.point + y);
      pose.support_triangle = walker.triangle_id;
      pose.pose = RigidTransform(frame_from_normal_and_tail(walker.normal, y), walker.point);
      grid.poses.push_back(std::move(pose));
    }
  }
  return grid;
}

HotspotSelection select_hotspot(const HotspotGrid& grid, std::span<const double> responses) {
  if (responses.size() != grid.poses.size()) {
    throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(grid.poses.size()) +
                                                " responses, got " +
                                                std::to_string(responses.size()));
  }
  if (responses.empty()) throw Error(ErrorKind::InvalidArgument, "empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < responses.size(); ++i) {
    if (responses[i] > responses[best]) best = i;
  }
  return {best, grid.poses[best]};
}

}  // namespace tmsnav
