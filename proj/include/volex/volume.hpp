#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "volex/linalg.hpp"
#include "volex/mesh.hpp"

namespace volex {

enum class ShapeKind { kCuboid, kSphere, kEllipsoid, kCad };

const char* shape_name(ShapeKind kind);
ShapeKind shape_from_name(const std::string& name);

// Size parameters are interpreted per kind:
//   ellipsoid: semi-axes (a, b, c) along x, y, z
//   sphere:    radius in size.x()
//   cuboid:    half extents along x, y, z
//   cad:       ignored; `mesh` supplies the centers
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kEllipsoid;
  Vec3 size = Vec3(1.0, 1.0, 1.0);
  std::optional<Mesh> mesh;
};

inline constexpr int kDefaultGaussianCount = 1000;
inline constexpr int kMinGaussianCount = 6;

struct NovGeometry {
  ShapeKind kind = ShapeKind::kEllipsoid;
  Vec3 size = Vec3(1.0, 1.0, 1.0);
  std::vector<Vec3> centers;
  // Surface mesh whose vertices are the centers (ellipsoid/sphere), or the
  // source CAD mesh. Absent for cuboids.
  std::optional<Mesh> mesh;

  std::size_t count() const { return centers.size(); }
};

// Signed residual of the generating surface's implicit equation at p; zero on
// the surface. Not defined for cad geometry (returns 0).
double implicit_residual(const NovGeometry& geometry, const Vec3& p);

// Evenly spaced centers on the surface. Sphere/ellipsoid use a (polar,
// azimuth) grid with twice as many azimuth steps as polar rings and a single
// center per pole; the ring count is chosen so K is as close as possible to
// target_count. Cuboids use a uniform lattice on every face.
NovGeometry build_volume(const ShapeSpec& shape, int target_count = kDefaultGaussianCount);

struct NeuralObjectVolume {
  NovGeometry geometry;
  Matrix features;  // K×C
  int class_id = 0;
  std::vector<double> visibility;  // per Gaussian, in [0,1]

  std::size_t count() const { return geometry.count(); }
  Eigen::Index channels() const { return features.cols(); }
};

NeuralObjectVolume attach_features(NovGeometry geometry, Matrix features, int class_id);

inline constexpr double kDefaultVisibilityThreshold = 0.1;

// Keeps the Gaussians with visibility >= threshold. The source mesh is kept
// untouched since it still describes the class surface.
NeuralObjectVolume filter_by_visibility(const NeuralObjectVolume& nov,
                                        double threshold = kDefaultVisibilityThreshold);

// Manifest text file next to `<stem>.centers.cavt`, `<stem>.features.cavt`
// and, when a mesh is present, `<stem>.mesh.obj`.
void save_volume(const NeuralObjectVolume& nov, const std::filesystem::path& manifest);
NeuralObjectVolume load_volume(const std::filesystem::path& manifest);

}  // namespace volex
