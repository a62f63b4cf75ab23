#include "volex/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "volex/error.hpp"
#include "volex/keyvalue.hpp"

namespace volex {

const char* shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kCuboid: return "cuboid";
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kEllipsoid: return "ellipsoid";
    case ShapeKind::kCad: return "cad";
  }
  return "?";
}

ShapeKind shape_from_name(const std::string& name) {
  if (name == "cuboid") return ShapeKind::kCuboid;
  if (name == "sphere") return ShapeKind::kSphere;
  if (name == "ellipsoid") return ShapeKind::kEllipsoid;
  if (name == "cad") return ShapeKind::kCad;
  throw Error(ErrorCode::kInvalidArgument, "unknown shape '" + name + "'");
}

double implicit_residual(const NovGeometry& g, const Vec3& p) {
  switch (g.kind) {
    case ShapeKind::kSphere:
    case ShapeKind::kEllipsoid: {
      const Vec3 axes = g.kind == ShapeKind::kSphere ? Vec3::Constant(g.size.x()) : g.size;
      return p.cwiseQuotient(axes).squaredNorm() - 1.0;
    }
    case ShapeKind::kCuboid:
      return p.cwiseAbs().cwiseQuotient(g.size).maxCoeff() - 1.0;
    case ShapeKind::kCad:
      return 0.0;
  }
  return 0.0;
}

namespace {

int ellipsoid_count(int rings) { return (rings - 1) * 2 * rings + 2; }
int cuboid_count(int n) { return 6 * n * n + 2; }

// Smallest resolution whose count is nearest to target (ties go to the
// coarser grid).
template <typename CountFn>
int pick_resolution(int target, int first, CountFn count) {
  int best = first;
  for (int r = first;; ++r) {
    if (std::abs(count(r) - target) < std::abs(count(best) - target)) best = r;
    if (count(r) >= target) break;
  }
  return best;
}

NovGeometry ellipsoid_grid(const Vec3& axes, int rings) {
  const int steps = 2 * rings;
  NovGeometry g;
  Mesh mesh;
  auto point = [&](double theta, double phi) {
    return Vec3(axes.x() * std::sin(theta) * std::cos(phi),
                axes.y() * std::sin(theta) * std::sin(phi), axes.z() * std::cos(theta));
  };
  mesh.vertices.push_back(Vec3(0.0, 0.0, axes.z()));
  for (int t = 1; t < rings; ++t) {
    const double theta = std::numbers::pi * t / rings;
    for (int p = 0; p < steps; ++p) {
      mesh.vertices.push_back(point(theta, 2.0 * std::numbers::pi * p / steps));
    }
  }
  mesh.vertices.push_back(Vec3(0.0, 0.0, -axes.z()));

  const int south = static_cast<int>(mesh.vertices.size()) - 1;
  auto ring = [&](int t, int p) { return 1 + (t - 1) * steps + (p % steps); };
  for (int p = 0; p < steps; ++p) mesh.faces.push_back({0, ring(1, p), ring(1, p + 1)});
  for (int t = 1; t + 1 < rings; ++t) {
    for (int p = 0; p < steps; ++p) {
      const int u0 = ring(t, p), u1 = ring(t, p + 1);
      const int l0 = ring(t + 1, p), l1 = ring(t + 1, p + 1);
      mesh.faces.push_back({u0, l0, l1});
      mesh.faces.push_back({u0, l1, u1});
    }
  }
  for (int p = 0; p < steps; ++p) {
    mesh.faces.push_back({south, ring(rings - 1, p + 1), ring(rings - 1, p)});
  }
  g.centers = mesh.vertices;
  g.mesh = std::move(mesh);
  return g;
}

NovGeometry cuboid_grid(const Vec3& half, int n) {
  NovGeometry g;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) {
        const bool boundary = i == 0 || i == n || j == 0 || j == n || k == 0 || k == n;
        if (!boundary) continue;
        g.centers.push_back(Vec3(half.x() * (2.0 * i / n - 1.0), half.y() * (2.0 * j / n - 1.0),
                                 half.z() * (2.0 * k / n - 1.0)));
      }
    }
  }
  return g;
}

// Drops exactly coincident points, keeping the first occurrence.
std::vector<Vec3> dedupe(const std::vector<Vec3>& pts) {
  std::set<std::array<double, 3>> seen;
  std::vector<Vec3> out;
  for (const auto& p : pts) {
    if (seen.insert({p.x(), p.y(), p.z()}).second) out.push_back(p);
  }
  return out;
}

}  // namespace

NovGeometry build_volume(const ShapeSpec& shape, int target_count) {
  if (shape.kind == ShapeKind::kCad) {
    if (!shape.mesh) throw Error(ErrorCode::kInvalidArgument, "cad shape without mesh");
    validate_mesh(*shape.mesh);
    NovGeometry g;
    g.kind = ShapeKind::kCad;
    g.centers = dedupe(shape.mesh->vertices);
    g.mesh = shape.mesh;
    return g;
  }
  if (target_count < kMinGaussianCount) {
    throw Error(ErrorCode::kInvalidArgument,
                "target count must be at least " + std::to_string(kMinGaussianCount));
  }
  const Vec3 size = shape.kind == ShapeKind::kSphere ? Vec3::Constant(shape.size.x()) : shape.size;
  if (!(size.minCoeff() > 0.0) || !size.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "non-positive axis length");
  }
  NovGeometry g;
  if (shape.kind == ShapeKind::kCuboid) {
    g = cuboid_grid(size, pick_resolution(target_count, 1, cuboid_count));
  } else {
    g = ellipsoid_grid(size, pick_resolution(target_count, 2, ellipsoid_count));
  }
  g.kind = shape.kind;
  g.size = shape.kind == ShapeKind::kSphere ? Vec3(shape.size.x(), shape.size.x(), shape.size.x())
                                            : shape.size;
  return g;
}

NeuralObjectVolume attach_features(NovGeometry geometry, Matrix features, int class_id) {
  if (features.rows() != static_cast<Eigen::Index>(geometry.count())) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature rows (" + std::to_string(features.rows()) +
                    ") do not match Gaussian count (" + std::to_string(geometry.count()) + ")");
  }
  NeuralObjectVolume nov;
  nov.visibility.assign(geometry.count(), 1.0);
  nov.geometry = std::move(geometry);
  nov.features = std::move(features);
  nov.class_id = class_id;
  return nov;
}

NeuralObjectVolume filter_by_visibility(const NeuralObjectVolume& nov, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "visibility threshold outside [0,1]");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < nov.visibility.size(); ++k) {
    if (nov.visibility[k] >= threshold) keep.push_back(static_cast<Eigen::Index>(k));
  }
  if (keep.empty()) throw Error(ErrorCode::kEmptyVolume, "empty volume");

  NeuralObjectVolume out;
  out.class_id = nov.class_id;
  out.geometry.kind = nov.geometry.kind;
  out.geometry.size = nov.geometry.size;
  out.geometry.mesh = nov.geometry.mesh;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), nov.features.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.geometry.centers.push_back(nov.geometry.centers[keep[r]]);
    out.features.row(static_cast<Eigen::Index>(r)) = nov.features.row(keep[r]);
    out.visibility.push_back(nov.visibility[keep[r]]);
  }
  return out;
}

namespace {

std::filesystem::path sibling(const std::filesystem::path& manifest, const std::string& suffix) {
  return manifest.parent_path() / (manifest.stem().string() + suffix);
}

}  // namespace

void save_volume(const NeuralObjectVolume& nov, const std::filesystem::path& manifest) {
  Matrix centers(static_cast<Eigen::Index>(nov.count()), 3);
  for (std::size_t k = 0; k < nov.count(); ++k) {
    centers.row(static_cast<Eigen::Index>(k)) = nov.geometry.centers[k].transpose();
  }
  const auto centers_path = sibling(manifest, ".centers.cavt");
  const auto features_path = sibling(manifest, ".features.cavt");
  write_tensor(matrix_to_tensor(centers), centers_path);
  write_tensor(matrix_to_tensor(nov.features), features_path);

  KeyValueFile kv;
  kv.set("format", std::string("volex-volume 1"));
  kv.set("shape", std::string(shape_name(nov.geometry.kind)));
  kv.set("size", std::vector<double>{nov.geometry.size.x(), nov.geometry.size.y(),
                                     nov.geometry.size.z()});
  kv.set("class", nov.class_id);
  kv.set("gaussians", static_cast<long long>(nov.count()));
  kv.set("channels", static_cast<long long>(nov.channels()));
  kv.set("centers", centers_path.filename().string());
  kv.set("features", features_path.filename().string());
  if (nov.geometry.mesh) {
    const auto mesh_path = sibling(manifest, ".mesh.obj");
    write_mesh_obj(*nov.geometry.mesh, mesh_path);
    kv.set("mesh", mesh_path.filename().string());
  }
  kv.set("visibility", nov.visibility);
  kv.save(manifest);
}

NeuralObjectVolume load_volume(const std::filesystem::path& manifest) {
  const auto kv = KeyValueFile::load(manifest);
  if (kv.get("format") != "volex-volume 1") {
    throw Error(ErrorCode::kBadVersion, "unsupported volume format '" + kv.get("format") + "'");
  }
  const auto dir = manifest.parent_path();
  const Matrix centers = tensor_to_matrix(read_tensor(dir / kv.get("centers")));
  if (centers.cols() != 3) throw Error(ErrorCode::kShapeMismatch, "centers must be K×3");
  NovGeometry g;
  g.kind = shape_from_name(kv.get("shape"));
  const auto size = kv.get_doubles("size");
  if (size.size() != 3) throw Error(ErrorCode::kParse, "size needs three values");
  g.size = Vec3(size[0], size[1], size[2]);
  for (Eigen::Index k = 0; k < centers.rows(); ++k) g.centers.push_back(centers.row(k).transpose());
  if (kv.has("mesh")) g.mesh = read_mesh_obj(dir / kv.get("mesh"));

  auto nov = attach_features(std::move(g), tensor_to_matrix(read_tensor(dir / kv.get("features"))),
                             static_cast<int>(kv.get_int("class")));
  nov.visibility = kv.get_doubles("visibility");
  if (nov.visibility.size() != nov.count()) {
    throw Error(ErrorCode::kShapeMismatch, "visibility length does not match Gaussian count");
  }
  for (double v : nov.visibility) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kOutOfRange, "visibility outside [0,1]");
  }
  return nov;
}

}  // namespace volex
