#pragma once

#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tmsnav/geometry.hpp"

namespace tmsnav {

using TriangleIndices = std::array<std::uint32_t, 3>;

/// A point on a mesh surface.
struct SurfaceHit {
  Vec3 point = Vec3::Zero();
  std::uint32_t triangle_id = 0;
  /// Ray parameter for ray queries; Euclidean distance for closest-point queries.
  double ray_parameter = 0.0;
};

/// Immutable indexed triangle surface with a bounding-volume hierarchy.
///
/// Winding defines the outward normal: normalize((v1 - v0) x (v2 - v0)). Triangles
/// with area <= 1e-9 mm^2 and out-of-range indices are rejected at construction, so
/// every query on a constructed mesh is total. Safe for concurrent queries.
class TriangleMesh {
 public:
  static constexpr double kMinTriangleArea = 1e-9;

  TriangleMesh(std::vector<Vec3> vertices, std::vector<TriangleIndices> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<TriangleIndices>& triangles() const { return triangles_; }
  std::size_t size() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  std::array<Vec3, 3> triangle_vertices(std::uint32_t triangle_id) const;

  /// Copy of this mesh with every vertex mapped through `t`.
  TriangleMesh transformed(const RigidTransform& t) const;

 private:
  friend SurfaceHit closest_point(const TriangleMesh& mesh, const Vec3& query);
  friend std::optional<SurfaceHit> ray_intersect(const TriangleMesh& mesh, const Vec3& origin,
                                                 const Vec3& direction);
  friend bool is_inside(const TriangleMesh& mesh, const Vec3& point);

  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t first = 0;  // leaf: offset into order_; inner: left child index
    std::uint32_t count = 0;  // 0 for inner nodes
    std::uint32_t right = 0;
  };

  void build_hierarchy();
  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end,
                           const std::vector<Vec3>& centroids);

  std::vector<Vec3> vertices_;
  std::vector<TriangleIndices> triangles_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

/// Outward unit normal of a triangle from its stored winding.
Vec3 triangle_normal(const TriangleMesh& mesh, std::uint32_t triangle_id);

/// Globally nearest surface point; exact distance ties go to the lowest triangle id.
/// Throws EmptyMesh on an empty mesh.
SurfaceHit closest_point(const TriangleMesh& mesh, const Vec3& query);

/// Reference path for closest_point: visits every triangle in id order.
SurfaceHit closest_point_exhaustive(const TriangleMesh& mesh, const Vec3& query);

/// Nearest intersection with ray parameter > 1e-9 along a unit direction, if any.
std::optional<SurfaceHit> ray_intersect(const TriangleMesh& mesh, const Vec3& origin,
                                        const Vec3& direction);

std::optional<SurfaceHit> ray_intersect_exhaustive(const TriangleMesh& mesh, const Vec3& origin,
                                                   const Vec3& direction);

/// Parity test against a closed surface. Meaningless for open meshes.
bool is_inside(const TriangleMesh& mesh, const Vec3& point);

/// Closest point on a single triangle to `query`.
Vec3 closest_point_on_triangle(const Vec3& query, const Vec3& a, const Vec3& b, const Vec3& c);

/// Moller-Trumbore; returns the ray parameter of a hit, if any (no lower bound applied).
std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& direction,
                                             const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace tmsnav
