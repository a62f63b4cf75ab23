#include "volex/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "volex/error.hpp"
#include "volex/keyvalue.hpp"
#include "volex/tensor.hpp"

namespace volex {

int PixelFaceMap::covered() const {
  return static_cast<int>(std::count_if(face.begin(), face.end(), [](int f) { return f != kNoFace; }));
}

namespace {

using Vec2 = Eigen::Vector2d;

double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Top-left rule for an edge a->b of a triangle with positive edge functions
// inside, in y-down pixel coordinates.
bool owns_boundary(const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  return (d.y() == 0.0 && d.x() > 0.0) || d.y() < 0.0;
}

constexpr double kNearPlane = 1e-9;

}  // namespace

PixelFaceMap rasterize(const Mesh& mesh, const Camera& camera) {
  validate_mesh(mesh);
  PixelFaceMap pfm;
  pfm.width = camera.width;
  pfm.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(camera.width) * camera.height;
  pfm.face.assign(n, kNoFace);
  pfm.barycentric.assign(n, {0.0, 0.0, 0.0});
  pfm.depth.assign(n, std::numeric_limits<double>::infinity());

  std::vector<Vec3> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = camera.to_camera(mesh.vertices[i]);

  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const auto& f = mesh.faces[fi];
    const Vec3 c[3] = {cam[f[0]], cam[f[1]], cam[f[2]]};
    if (c[0].z() <= kNearPlane || c[1].z() <= kNearPlane || c[2].z() <= kNearPlane) continue;
    Vec2 p[3];
    for (int k = 0; k < 3; ++k) {
      p[k] = Vec2(camera.cx + camera.fx * c[k].x() / c[k].z(), camera.cy - camera.fy * c[k].y() / c[k].z());
    }
    // Front faces wind counter-clockwise on screen (y up), i.e. negative area
    // in y-down pixel coordinates. Swap two vertices to get positive edges.
    const double area = edge(p[0], p[1], p[2]);
    if (!(area < 0.0)) continue;
    const int order[3] = {0, 2, 1};
    const Vec2 q[3] = {p[order[0]], p[order[1]], p[order[2]]};
    const double A = -area;
    const bool own[3] = {owns_boundary(q[1], q[2]), owns_boundary(q[2], q[0]), owns_boundary(q[0], q[1])};

    const double umin = std::min({q[0].x(), q[1].x(), q[2].x()});
    const double umax = std::max({q[0].x(), q[1].x(), q[2].x()});
    const double vmin = std::min({q[0].y(), q[1].y(), q[2].y()});
    const double vmax = std::max({q[0].y(), q[1].y(), q[2].y()});
    const int x0 = std::max(0, static_cast<int>(std::ceil(umin - 0.5)));
    const int x1 = std::min(camera.width - 1, static_cast<int>(std::floor(umax - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(vmin - 0.5)));
    const int y1 = std::min(camera.height - 1, static_cast<int>(std::floor(vmax - 0.5)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vec2 s(x + 0.5, y + 0.5);
        const double e[3] = {edge(q[1], q[2], s), edge(q[2], q[0], s), edge(q[0], q[1], s)};
        bool inside = true;
        for (int k = 0; k < 3 && inside; ++k) inside = e[k] > 0.0 || (e[k] == 0.0 && own[k]);
        if (!inside) continue;
        // Weights in swapped order -> original vertex order.
        double w[3];
        w[order[0]] = e[0] / A;
        w[order[1]] = e[1] / A;
        w[order[2]] = e[2] / A;
        const double depth = 1.0 / (w[0] / c[0].z() + w[1] / c[1].z() + w[2] / c[2].z());
        const std::size_t idx = static_cast<std::size_t>(y) * camera.width + x;
        if (depth < pfm.depth[idx]) {
          pfm.depth[idx] = depth;
          pfm.face[idx] = static_cast<int>(fi);
          pfm.barycentric[idx] = {w[0], w[1], w[2]};
        }
      }
    }
  }
  return pfm;
}

double FaceAttribution::total() const {
  double s = uncovered;
  for (double v : faces) s += v;
  return s;
}

FaceAttribution project_attribution(const Grid& attribution, const PixelFaceMap& pfm,
                                    std::size_t face_count) {
  if (attribution.width != pfm.width || attribution.height != pfm.height) {
    throw Error(ErrorCode::kShapeMismatch, "attribution resolution does not match the rasterization");
  }
  FaceAttribution out;
  out.faces.assign(face_count, 0.0);
  for (std::size_t i = 0; i < attribution.values.size(); ++i) {
    const double v = attribution.values[i];
    if (v < 0.0) throw Error(ErrorCode::kOutOfRange, "negative attribution; project A+ only");
    const int f = pfm.face[i];
    if (f == kNoFace) {
      out.uncovered += v;
    } else {
      if (static_cast<std::size_t>(f) >= face_count) {
        throw Error(ErrorCode::kIndexOutOfRange, "face id exceeds face count");
      }
      out.faces[f] += v;
    }
  }
  return out;
}

Grid resize_mass_preserving(const Grid& src, int width, int height) {
  if (width <= 0 || height <= 0 || src.width <= 0 || src.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "resize needs non-empty grids");
  }
  Grid out(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double tx = fx - x0;
      out.at(x, y) = (1 - ty) * ((1 - tx) * src.at(x0, y0) + tx * src.at(x1, y0)) +
                     ty * ((1 - tx) * src.at(x0, y1) + tx * src.at(x1, y1));
    }
  }
  const double before = src.sum();
  const double after = out.sum();
  if (after != 0.0) {
    for (double& v : out.values) v *= before / after;
  }
  return out;
}

Grid render_face_attribution(const FaceAttribution& attribution, const PixelFaceMap& pfm) {
  Grid img(pfm.width, pfm.height);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const int f = pfm.face[i];
    if (f == kNoFace) continue;
    if (static_cast<std::size_t>(f) >= attribution.faces.size()) {
      throw Error(ErrorCode::kIndexOutOfRange, "face id exceeds attribution length");
    }
    // Per-face texture: every vertex of the face carries the face value.
    const auto& b = pfm.barycentric[i];
    img.values[i] = (b[0] + b[1] + b[2]) * attribution.faces[f];
  }
  const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
  const double mn = *lo, mx = *hi;
  if (mx == mn) {
    if (mx != 0.0) std::fill(img.values.begin(), img.values.end(), 1.0);
    return img;
  }
  for (double& v : img.values) v = std::clamp((v - mn) / (mx - mn), 0.0, 1.0);
  return img;
}

FaceAttribution aggregate_face_attributions(std::span<const FaceAttribution> items) {
  if (items.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to aggregate");
  FaceAttribution out;
  out.faces.assign(items.front().faces.size(), 0.0);
  for (const auto& it : items) {
    if (it.faces.size() != out.faces.size()) {
      throw Error(ErrorCode::kShapeMismatch, "face counts differ");
    }
    for (std::size_t f = 0; f < out.faces.size(); ++f) out.faces[f] += it.faces[f];
    out.uncovered += it.uncovered;
  }
  if (out.faces.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.faces.begin(), out.faces.end());
  const double mn = *lo, mx = *hi;
  for (double& v : out.faces) {
    v = mx > mn ? (v - mn) / (mx - mn) : (mx > 0.0 ? 1.0 : 0.0);
  }
  return out;
}

void save_face_attribution(const FaceAttribution& fa, const std::filesystem::path& manifest,
                           const std::vector<std::pair<std::string, std::string>>& extra) {
  const auto tensor_name = manifest.stem().string() + ".faces.cavt";
  const auto n = static_cast<std::uint32_t>(fa.faces.size());
  std::vector<float> data(fa.faces.begin(), fa.faces.end());
  write_tensor(Tensor({n}, std::move(data)),
               manifest.parent_path() / tensor_name);
  KeyValueFile kv;
  kv.set("format", std::string("volex-face-attribution 1"));
  kv.set("faces", tensor_name);
  kv.set("face_count", static_cast<long long>(fa.faces.size()));
  kv.set("uncovered", fa.uncovered);
  for (const auto& [k, v] : extra) kv.set(k, v);
  kv.save(manifest);
}

FaceAttribution load_face_attribution(const std::filesystem::path& manifest) {
  const auto kv = KeyValueFile::load(manifest);
  if (kv.get("format") != "volex-face-attribution 1") {
    throw Error(ErrorCode::kBadVersion, "unsupported face attribution format");
  }
  const Tensor t = read_tensor(manifest.parent_path() / kv.get("faces"));
  if (t.rank() != 1) throw Error(ErrorCode::kShapeMismatch, "face attribution must be a vector");
  FaceAttribution fa;
  fa.faces.assign(t.data.begin(), t.data.end());
  fa.uncovered = kv.get_double("uncovered");
  return fa;
}

}  // namespace volex
