#include "volex/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "volex/error.hpp"
#include "volex/feature_map.hpp"
#include "volex/image.hpp"
#include "volex/manifest.hpp"
#include "volex/raster.hpp"
#include "volex/tensor.hpp"
#include "volex/volume.hpp"

namespace fs = std::filesystem;

namespace volex {

namespace {

constexpr std::array<std::array<double, 3>, 5> kAxes = {{
    {1.2, 0.5, 0.7},
    {0.9, 0.8, 0.5},
    {0.7, 0.7, 0.7},
    {0.5, 1.0, 0.6},
    {1.1, 0.45, 0.45},
}};

// Occluders are whole tiles of this many feature pixels per side.
constexpr int kOcclusionTile = 4;

const char* const kPartNames[4] = {"left-back", "right-back", "left-front", "right-front"};

Vec3 class_axes(int y, std::mt19937_64& rng) {
  if (y < static_cast<int>(kAxes.size())) return Vec3(kAxes[y][0], kAxes[y][1], kAxes[y][2]);
  std::uniform_real_distribution<double> u(0.45, 1.2);
  return Vec3(u(rng), u(rng), u(rng));
}

Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> az(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> el(radians(-10.0), radians(40.0));
  std::uniform_real_distribution<double> th(radians(-10.0), radians(10.0));
  Pose p;
  p.azimuth = az(rng);
  p.elevation = el(rng);
  p.theta = th(rng);
  p.distance = 15.0;
  return p;
}

// Gaussian index seen at a covered pixel: the face vertex with the largest weight.
int dominant_vertex(const Mesh& mesh, const PixelFaceMap& pfm, std::size_t i) {
  const auto& b = pfm.barycentric[i];
  const auto& f = mesh.faces[pfm.face[i]];
  const int k = static_cast<int>(std::max_element(b.begin(), b.end()) - b.begin());
  return f[k];
}

int part_of(const Vec3& c) { return 1 + (c.x() > 0.0 ? 1 : 0) + (c.z() > 0.0 ? 2 : 0); }

struct ClassModel {
  NeuralObjectVolume volume;
  Mesh mesh;
};

ClassModel make_class(int y, const FixtureOptions& o, const RunConfig& config, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const Vec3 axes = class_axes(y, rng);
  NovGeometry geo = build_volume(ShapeSpec{ShapeKind::kEllipsoid, axes, std::nullopt});
  const Mesh mesh = *geo.mesh;

  Vector mean(o.channels);
  for (int c = 0; c < o.channels; ++c) mean(c) = n01(rng);
  mean.normalize();
  Matrix spread(o.channels, 3);
  for (int c = 0; c < o.channels; ++c) {
    for (int d = 0; d < 3; ++d) spread(c, d) = 0.6 * n01(rng);
  }
  Matrix features(static_cast<Eigen::Index>(geo.count()), o.channels);
  for (std::size_t k = 0; k < geo.count(); ++k) {
    const Vec3 dir = geo.centers[k].cwiseQuotient(axes).normalized();
    Vector g = mean + spread * dir;
    for (int c = 0; c < o.channels; ++c) g(c) += o.volume_noise * n01(rng);
    features.row(static_cast<Eigen::Index>(k)) = g.normalized().transpose();
  }
  NeuralObjectVolume nov = attach_features(std::move(geo), std::move(features), y);

  std::vector<int> seen(nov.count(), 0);
  for (int v = 0; v < o.training_views; ++v) {
    const Camera cam = camera_from_pose(random_pose(rng), config.feature_canvas(), config.base_focal);
    const PixelFaceMap pfm = rasterize(mesh, cam);
    std::vector<std::uint8_t> hit(nov.count(), 0);
    for (std::size_t i = 0; i < pfm.face.size(); ++i) {
      if (pfm.face[i] != kNoFace) hit[dominant_vertex(mesh, pfm, i)] = 1;
    }
    for (std::size_t k = 0; k < hit.size(); ++k) seen[k] += hit[k];
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    nov.visibility[k] = static_cast<double>(seen[k]) / o.training_views;
  }
  return {std::move(nov), mesh};
}

void write_mask(const std::vector<int>& labels, int w, int h, const fs::path& path) {
  PartMask m;
  m.width = w;
  m.height = h;
  m.labels = labels;
  write_part_mask(m, path);
}

}  // namespace

fs::path generate_fixture(const FixtureOptions& o, const RunConfig& config, const fs::path& out_dir) {
  if (o.classes < 2) throw Error(ErrorCode::kInvalidArgument, "fixture needs at least 2 classes");
  if (o.images_per_class < 1) throw Error(ErrorCode::kInvalidArgument, "images_per_class must be >= 1");
  if (o.channels < 1) throw Error(ErrorCode::kInvalidArgument, "channels must be >= 1");
  if (!(o.occlusion >= 0.0 && o.occlusion <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "occlusion fraction outside [0,1]");
  }
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "volumes", ec);
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> n01(0.0, 1.0);

  EvalManifest manifest;
  manifest.classes = o.classes;
  manifest.tau = config.tau;
  for (int k = 0; k < 4; ++k) manifest.parts.push_back({k + 1, kPartNames[k]});

  std::vector<ClassModel> models;
  for (int y = 0; y < o.classes; ++y) {
    models.push_back(make_class(y, o, config, rng));
    const std::string stem = "class" + std::to_string(y);
    save_volume(models.back().volume, out_dir / "volumes" / (stem + ".vol"));
    write_mesh_obj(models.back().mesh, out_dir / "volumes" / (stem + ".obj"));
    manifest.volumes.push_back(fs::path("volumes") / (stem + ".vol"));
  }

  const Canvas fc = config.feature_canvas();
  const Canvas cc = config.canvas();
  const int tiles_x = (fc.width + kOcclusionTile - 1) / kOcclusionTile;
  const int tiles_y = (fc.height + kOcclusionTile - 1) / kOcclusionTile;
  const int tiles_hidden = static_cast<int>(std::lround(o.occlusion * tiles_x * tiles_y));

  for (int y = 0; y < o.classes; ++y) {
    const auto& model = models[y];
    for (int n = 0; n < o.images_per_class; ++n) {
      ImageRecord rec;
      rec.name = "c" + std::to_string(y) + "_" + (n < 10 ? "0" : "") + std::to_string(n);
      rec.label = y;
      rec.pose = random_pose(rng);

      const PixelFaceMap fpfm = rasterize(model.mesh, camera_from_pose(rec.pose, fc, config.base_focal));
      FeatureMap f(fc.height, fc.width, o.channels);
      for (int i = 0; i < f.pixels(); ++i) {
        auto px = f.pixel(i);
        if (fpfm.face[i] == kNoFace) {
          for (auto& v : px) v = o.background_scale * n01(rng) / std::sqrt(static_cast<double>(o.channels));
        } else {
          const int k = dominant_vertex(model.mesh, fpfm, i);
          for (int c = 0; c < o.channels; ++c) px[c] = model.volume.features(k, c) + o.feature_noise * n01(rng);
        }
      }
      FeatureMap occluded = f;
      std::vector<int> tiles(static_cast<std::size_t>(tiles_x) * tiles_y);
      for (std::size_t t = 0; t < tiles.size(); ++t) tiles[t] = static_cast<int>(t);
      for (int t = 0; t < tiles_hidden; ++t) {
        std::uniform_int_distribution<int> pick(t, static_cast<int>(tiles.size()) - 1);
        std::swap(tiles[t], tiles[pick(rng)]);
        const int tx = tiles[t] % tiles_x, ty = tiles[t] / tiles_x;
        for (int yy = ty * kOcclusionTile; yy < std::min(fc.height, (ty + 1) * kOcclusionTile); ++yy) {
          for (int xx = tx * kOcclusionTile; xx < std::min(fc.width, (tx + 1) * kOcclusionTile); ++xx) {
            for (int c = 0; c < o.channels; ++c) occluded.at(yy, xx, c) = 0.0;
          }
        }
      }

      const PixelFaceMap cpfm = rasterize(model.mesh, camera_from_pose(rec.pose, cc, config.base_focal));
      std::vector<int> object(cpfm.face.size(), 0), parts(cpfm.face.size(), 0);
      for (std::size_t i = 0; i < cpfm.face.size(); ++i) {
        if (cpfm.face[i] == kNoFace) continue;
        object[i] = 1;
        parts[i] = part_of(model.volume.geometry.centers[dominant_vertex(model.mesh, cpfm, i)]);
      }

      const fs::path dir("images");
      rec.features = dir / (rec.name + ".features.cavt");
      rec.occluded_features = dir / (rec.name + ".occluded.cavt");
      rec.object_mask = dir / (rec.name + ".object.pgm");
      rec.part_mask = dir / (rec.name + ".parts.pgm");
      rec.mesh = fs::path("volumes") / ("class" + std::to_string(y) + ".obj");
      write_tensor(feature_map_to_tensor(f), out_dir / rec.features);
      write_tensor(feature_map_to_tensor(occluded), out_dir / rec.occluded_features);
      write_mask(object, cc.width, cc.height, out_dir / rec.object_mask);
      write_mask(parts, cc.width, cc.height, out_dir / rec.part_mask);
      manifest.images.push_back(std::move(rec));
    }
  }
  const fs::path path = out_dir / "manifest.txt";
  save_eval_manifest(manifest, config, path);
  return path;
}

std::uint64_t tree_checksum(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    const std::string name = f.generic_string();
    h = fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(name.data()), name.size()), h);
    const auto bytes = read_file_bytes(dir / f);
    h = fnv1a64(bytes, h);
  }
  return h;
}

}  // namespace volex
