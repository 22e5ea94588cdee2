#include "tmsnav/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmsnav/error.hpp"

namespace tmsnav {

namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr double kRayMinParameter = 1e-9;
constexpr double kParallelDeterminant = 1e-15;

// Boxes are padded so that rounding in the per-triangle distance never makes a
// box look farther than a point that lies inside it.
void pad(Eigen::AlignedBox3d& box) {
  const double margin = 1e-9 + 1e-12 * box.diagonal().cwiseAbs().maxCoeff();
  box.min().array() -= margin;
  box.max().array() += margin;
}

double box_squared_distance(const Eigen::AlignedBox3d& box, const Vec3& p) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    double d = 0.0;
    if (p(i) < box.min()(i))
      d = box.min()(i) - p(i);
    else if (p(i) > box.max()(i))
      d = p(i) - box.max()(i);
    d2 += d * d;
  }
  return d2;
}

// Entry parameter of a ray into a box, or +inf on a miss.
double box_ray_entry(const Eigen::AlignedBox3d& box, const Vec3& origin, const Vec3& inv_dir) {
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::isinf(inv_dir(i))) {
      if (origin(i) < box.min()(i) || origin(i) > box.max()(i)) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    double t0 = (box.min()(i) - origin(i)) * inv_dir(i);
    double t1 = (box.max()(i) - origin(i)) * inv_dir(i);
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  return t_near;
}

bool better(double d, std::uint32_t id, double best_d, std::uint32_t best_id) {
  return d < best_d || (d == best_d && id < best_id);
}

Vec3 inverse_direction(const Vec3& d) {
  Vec3 inv;
  for (int i = 0; i < 3; ++i) {
    inv(i) = d(i) == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / d(i);
  }
  return inv;
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<TriangleIndices> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite mesh vertex");
  }
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    for (auto index : triangles_[i]) {
      if (index >= vertices_.size()) {
        throw Error(ErrorKind::InvalidArgument, "triangle " + std::to_string(i) +
                                                    " references vertex " + std::to_string(index) +
                                                    " out of range");
      }
    }
    const auto [a, b, c] = triangle_vertices(static_cast<std::uint32_t>(i));
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (!(area > kMinTriangleArea)) {
      throw Error(ErrorKind::DegenerateTriangle,
                  "triangle " + std::to_string(i) + " has area " + std::to_string(area));
    }
  }
  build_hierarchy();
}

std::array<Vec3, 3> TriangleMesh::triangle_vertices(std::uint32_t triangle_id) const {
  const auto& t = triangles_.at(triangle_id);
  return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& t) const {
  std::vector<Vec3> moved;
  moved.reserve(vertices_.size());
  for (const auto& v : vertices_) moved.push_back(t.apply(v));
  return TriangleMesh(std::move(moved), triangles_);
}

void TriangleMesh::build_hierarchy() {
  nodes_.clear();
  order_.resize(triangles_.size());
  if (triangles_.empty()) return;
  std::vector<Vec3> centroids(triangles_.size());
  for (std::uint32_t i = 0; i < triangles_.size(); ++i) {
    order_[i] = i;
    const auto [a, b, c] = triangle_vertices(i);
    centroids[i] = (a + b + c) / 3.0;
  }
  nodes_.reserve(2 * triangles_.size() / kLeafSize + 1);
  build_node(0, static_cast<std::uint32_t>(triangles_.size()), centroids);
}

std::uint32_t TriangleMesh::build_node(std::uint32_t begin, std::uint32_t end,
                                       const std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (auto v : triangles_[order_[i]]) box.extend(vertices_[v]);
    centroid_box.extend(centroids[order_[i]]);
  }
  pad(box);
  nodes_[index].box = box;

  if (end - begin <= kLeafSize) {
    nodes_[index].first = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis = 0;
  centroid_box.diagonal().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) {
                     const double cl = centroids[l](axis);
                     const double cr = centroids[r](axis);
                     return cl < cr || (cl == cr && l < r);
                   });
  const std::uint32_t left = build_node(begin, mid, centroids);
  const std::uint32_t right = build_node(mid, end, centroids);
  nodes_[index].first = left;
  nodes_[index].right = right;
  return index;
}

Vec3 triangle_normal(const TriangleMesh& mesh, std::uint32_t triangle_id) {
  if (triangle_id >= mesh.size()) {
    throw Error(ErrorKind::InvalidArgument, "triangle id out of range");
  }
  const auto [p, p1, p2] = mesh.triangle_vertices(triangle_id);
  const Vec3 n = (p1 - p).cross(p2 - p);
  const double norm = n.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::DegenerateTriangle, "zero-area triangle");
  return n / norm;
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& direction,
                                             const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = direction.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kParallelDeterminant) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = direction.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(qvec) * inv_det;
}

SurfaceHit closest_point_exhaustive(const TriangleMesh& mesh, const Vec3& query) {
  if (mesh.empty()) throw Error(ErrorKind::EmptyMesh, "closest_point on an empty mesh");
  SurfaceHit best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < mesh.size(); ++i) {
    const auto [a, b, c] = mesh.triangle_vertices(i);
    const Vec3 p = closest_point_on_triangle(query, a, b, c);
    const double d2 = (p - query).squaredNorm();
    if (better(d2, i, best_d2, best.triangle_id)) {
      best_d2 = d2;
      best.point = p;
      best.triangle_id = i;
    }
  }
  best.ray_parameter = std::sqrt(best_d2);
  return best;
}

SurfaceHit closest_point(const TriangleMesh& mesh, const Vec3& query) {
  if (mesh.empty()) throw Error(ErrorKind::EmptyMesh, "closest_point on an empty mesh");
  SurfaceHit best;
  double best_d2 = std::numeric_limits<double>::infinity();
  best.triangle_id = std::numeric_limits<std::uint32_t>::max();

  std::vector<std::uint32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const auto& node = mesh.nodes_[stack.back()];
    stack.pop_back();
    if (box_squared_distance(node.box, query) > best_d2) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        const std::uint32_t id = mesh.order_[k];
        const auto [a, b, c] = mesh.triangle_vertices(id);
        const Vec3 p = closest_point_on_triangle(query, a, b, c);
        const double d2 = (p - query).squaredNorm();
        if (better(d2, id, best_d2, best.triangle_id)) {
          best_d2 = d2;
          best.point = p;
          best.triangle_id = id;
        }
      }
      continue;
    }
    const double dl = box_squared_distance(mesh.nodes_[node.first].box, query);
    const double dr = box_squared_distance(mesh.nodes_[node.right].box, query);
    // Push the farther child first so the nearer one is explored first.
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.first);
    } else {
      stack.push_back(node.first);
      stack.push_back(node.right);
    }
  }
  best.ray_parameter = std::sqrt(best_d2);
  return best;
}

std::optional<SurfaceHit> ray_intersect_exhaustive(const TriangleMesh& mesh, const Vec3& origin,
                                                   const Vec3& direction) {
  std::optional<SurfaceHit> best;
  for (std::uint32_t i = 0; i < mesh.size(); ++i) {
    const auto [a, b, c] = mesh.triangle_vertices(i);
    const auto t = intersect_ray_triangle(origin, direction, a, b, c);
    if (!t || !(*t > kRayMinParameter)) continue;
    if (!best || better(*t, i, best->ray_parameter, best->triangle_id)) {
      best = SurfaceHit{origin + *t * direction, i, *t};
    }
  }
  return best;
}

std::optional<SurfaceHit> ray_intersect(const TriangleMesh& mesh, const Vec3& origin,
                                        const Vec3& direction) {
  std::optional<SurfaceHit> best;
  if (mesh.empty()) return best;
  const Vec3 inv_dir = inverse_direction(direction);

  std::vector<std::uint32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const auto& node = mesh.nodes_[stack.back()];
    stack.pop_back();
    const double entry = box_ray_entry(node.box, origin, inv_dir);
    if (std::isinf(entry) || (best && entry > best->ray_parameter)) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        const std::uint32_t id = mesh.order_[k];
        const auto [a, b, c] = mesh.triangle_vertices(id);
        const auto t = intersect_ray_triangle(origin, direction, a, b, c);
        if (!t || !(*t > kRayMinParameter)) continue;
        if (!best || better(*t, id, best->ray_parameter, best->triangle_id)) {
          best = SurfaceHit{origin + *t * direction, id, *t};
        }
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.first);
  }
  return best;
}

bool is_inside(const TriangleMesh& mesh, const Vec3& point) {
  if (mesh.empty()) return false;
  // An irrational-looking direction keeps the ray off edges and vertices of
  // axis-aligned or symmetric meshes.
  const Vec3 direction =
      Vec3(0.5773502691896258, 0.6137431252487263, 0.5385164807134504).normalized();
  const Vec3 inv_dir = inverse_direction(direction);
  std::size_t crossings = 0;

  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const auto& node = mesh.nodes_[stack.back()];
    stack.pop_back();
    if (std::isinf(box_ray_entry(node.box, point, inv_dir))) continue;
    if (node.count > 0) {
      for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
        const auto [a, b, c] = mesh.triangle_vertices(mesh.order_[k]);
        const auto t = intersect_ray_triangle(point, direction, a, b, c);
        if (t && *t > kRayMinParameter) ++crossings;
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.first);
  }
  return crossings % 2 == 1;
}

}  // namespace tmsnav
