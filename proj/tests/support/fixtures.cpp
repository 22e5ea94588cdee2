#include "fixtures.hpp"

#include <unistd.h>

#include <cmath>
#include <map>
#include <numbers>

namespace tmsnav::testing {

namespace {

constexpr double kPi = std::numbers::pi;

struct UvGrid {
  std::vector<Vec3> vertices;
  std::vector<TriangleIndices> triangles;
};

// Pole, rings 1..stacks-1, pole. With `half`, stops at the equator ring.
UvGrid uv_grid(int slices, int stacks, bool half) {
  UvGrid g;
  g.vertices.emplace_back(0.0, 0.0, 1.0);
  const int last_ring = half ? stacks / 2 : stacks - 1;
  for (int i = 1; i <= last_ring; ++i) {
    const double theta = kPi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double phi = 2.0 * kPi * j / slices;
      g.vertices.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                              std::cos(theta));
    }
  }
  const auto ring = [&](int i, int j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * slices + (j % slices));
  };
  for (int j = 0; j < slices; ++j) g.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i < last_ring; ++i) {
    for (int j = 0; j < slices; ++j) {
      g.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      g.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  if (!half) {
    g.vertices.emplace_back(0.0, 0.0, -1.0);
    const auto south = static_cast<std::uint32_t>(g.vertices.size() - 1);
    for (int j = 0; j < slices; ++j) {
      g.triangles.push_back({south, ring(last_ring, j + 1), ring(last_ring, j)});
    }
  }
  return g;
}

}  // namespace

TriangleMesh uv_sphere(double radius, int slices, int stacks, const Vec3& center) {
  UvGrid g = uv_grid(slices, stacks, false);
  for (auto& v : g.vertices) v = center + radius * v;
  return TriangleMesh(std::move(g.vertices), std::move(g.triangles));
}

TriangleMesh ellipsoid(const Vec3& semi_axes, int slices, int stacks) {
  UvGrid g = uv_grid(slices, stacks, false);
  for (auto& v : g.vertices) v = v.cwiseProduct(semi_axes);
  return TriangleMesh(std::move(g.vertices), std::move(g.triangles));
}

TriangleMesh hemisphere(double radius, int slices, int stacks) {
  UvGrid g = uv_grid(slices, stacks, true);
  for (auto& v : g.vertices) v *= radius;
  return TriangleMesh(std::move(g.vertices), std::move(g.triangles));
}

TriangleMesh icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{{-1, t, 0},  {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                      {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<TriangleIndices> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    const auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<std::uint32_t>(v.size() - 1);
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<TriangleIndices> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const auto ab = midpoint(tri[0], tri[1]);
      const auto bc = midpoint(tri[1], tri[2]);
      const auto ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = center + radius * p;
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh flat_patch(int cells, double cell_size, double height) {
  std::vector<Vec3> v;
  std::vector<TriangleIndices> f;
  const double origin = -0.5 * cells * cell_size;
  for (int i = 0; i <= cells; ++i) {
    for (int j = 0; j <= cells; ++j) {
      v.emplace_back(origin + j * cell_size, origin + i * cell_size, height);
    }
  }
  const auto id = [&](int i, int j) { return static_cast<std::uint32_t>(i * (cells + 1) + j); };
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      f.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
    }
  }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh cube(double h) {
  std::vector<Vec3> v{{-h, -h, -h}, {h, -h, -h}, {h, h, -h}, {-h, h, -h},
                      {-h, -h, h},  {h, -h, h},  {h, h, h},  {-h, h, h}};
  std::vector<TriangleIndices> f{{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                                 {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh random_soup(Rng& rng, int triangles, double half_size) {
  std::vector<Vec3> v;
  std::vector<TriangleIndices> f;
  while (static_cast<int>(f.size()) < triangles) {
    const Vec3 a = random_point(rng, half_size);
    const Vec3 b = a + random_point(rng, half_size * 0.2);
    const Vec3 c = a + random_point(rng, half_size * 0.2);
    if ((b - a).cross(c - a).norm() < 1e-3) continue;
    const auto base = static_cast<std::uint32_t>(v.size());
    v.insert(v.end(), {a, b, c});
    f.push_back({base, base + 1, base + 2});
  }
  return TriangleMesh(std::move(v), std::move(f));
}

Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

RigidTransform random_transform(Rng& rng, double translation_scale) {
  return RigidTransform(random_rotation(rng), random_point(rng, translation_scale));
}

Vec3 random_point(Rng& rng, double half_size) {
  return Vec3(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0) *
         half_size;
}

std::filesystem::path scratch_dir(const std::string& name) {
  // Per-process suffix: ctest may run test cases of one binary concurrently.
  const auto dir = std::filesystem::temp_directory_path() /
                   ("tmsnav_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tmsnav::testing
