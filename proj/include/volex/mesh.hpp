#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace volex {

using Vec3 = Eigen::Vector3d;

// Triangle mesh with 0-based indices. Faces wind counter-clockwise when seen
// from outside the surface.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  std::size_t face_count() const { return faces.size(); }
};

// Throws kIndexOutOfRange / kEmptyMesh when the invariants do not hold.
void validate_mesh(const Mesh& mesh);

// Wavefront subset: only `v` and `f` records are honoured. Polygons are fan
// triangulated around their first vertex; `a/b/c` style references keep the
// position index; negative indices are relative to the current vertex count.
Mesh parse_mesh_obj(std::istream& in);
Mesh read_mesh_obj(const std::filesystem::path& path);
void write_mesh_obj(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace volex
