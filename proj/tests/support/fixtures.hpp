#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tmsnav/geometry.hpp"
#include "tmsnav/mesh.hpp"
#include "tmsnav/random.hpp"

namespace tmsnav::testing {

// Closed surfaces below are wound so that triangle normals point outward.
TriangleMesh uv_sphere(double radius, int slices, int stacks, const Vec3& center = Vec3::Zero());
TriangleMesh icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriangleMesh ellipsoid(const Vec3& semi_axes, int slices, int stacks);
// Upper half of a UV sphere; open at the equator, apex vertex at (0,0,radius).
TriangleMesh hemisphere(double radius, int slices, int stacks);
// Square grid in the plane z = height, normals +z, centered on the z axis.
TriangleMesh flat_patch(int cells, double cell_size, double height = 0.0);
TriangleMesh cube(double half_size);
// Unconnected random triangles inside a box of the given half size.
TriangleMesh random_soup(Rng& rng, int triangles, double half_size);

Mat3 random_rotation(Rng& rng);
RigidTransform random_transform(Rng& rng, double translation_scale);
Vec3 random_point(Rng& rng, double half_size);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace tmsnav::testing
