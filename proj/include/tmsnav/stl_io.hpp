#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tmsnav/mesh.hpp"

namespace tmsnav {

/// Parses an ASCII STL body. Facet normals in the file are ignored; the winding
/// of each facet defines its normal. Bitwise-identical vertices are welded.
TriangleMesh parse_ascii_stl(std::istream& in);

TriangleMesh load_ascii_stl(const std::filesystem::path& path);

/// Writes facets with the normal recomputed from winding, 17 significant digits.
void write_ascii_stl(const TriangleMesh& mesh, std::ostream& out,
                     const std::string& solid_name = "mesh");

void save_ascii_stl(const TriangleMesh& mesh, const std::filesystem::path& path,
                    const std::string& solid_name = "mesh");

}  // namespace tmsnav
