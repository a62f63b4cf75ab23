#pragma once

// Test-only reference implementations. Each one is written independently of
// the library path it checks: plain loops, exhaustive enumeration, ray casts.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "volex/camera.hpp"
#include "volex/concepts.hpp"
#include "volex/feature_map.hpp"
#include "volex/mesh.hpp"
#include "volex/raster.hpp"

namespace volex::oracle {

struct NaiveMatch {
  std::vector<double> scores;
  std::vector<int> winner_class;
  std::vector<int> winner_concept;
};

inline std::vector<double> unit(const std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  std::vector<double> out(v);
  if (n > 0.0) {
    for (double& x : out) x /= n;
  }
  return out;
}

// pixel × class × concept triple loop over cosine similarities.
inline NaiveMatch naive_match(const FeatureMap& f, const std::vector<Matrix>& banks) {
  NaiveMatch r;
  r.scores.assign(banks.size(), 0.0);
  for (int i = 0; i < f.pixels(); ++i) {
    const auto px = f.pixel(i);
    const auto fi = unit(std::vector<double>(px.begin(), px.end()));
    double global = -std::numeric_limits<double>::infinity();
    int gc = 0, gj = 0;
    for (std::size_t y = 0; y < banks.size(); ++y) {
      double best = -std::numeric_limits<double>::infinity();
      int bj = 0;
      for (Eigen::Index j = 0; j < banks[y].rows(); ++j) {
        std::vector<double> h(banks[y].cols());
        for (Eigen::Index c = 0; c < banks[y].cols(); ++c) h[c] = banks[y](j, c);
        h = unit(h);
        double s = 0.0;
        for (std::size_t c = 0; c < h.size(); ++c) s += fi[c] * h[c];
        if (s > best) {
          best = s;
          bj = static_cast<int>(j);
        }
      }
      r.scores[y] += best;
      if (best > global || (best == global && bj < gj)) {
        global = best;
        gc = static_cast<int>(y);
        gj = bj;
      }
    }
    r.winner_class.push_back(gc);
    r.winner_concept.push_back(gj);
  }
  return r;
}

// Minimum within-cluster SSE over every assignment of n points to d
// non-empty clusters.
inline double exhaustive_min_sse(const Matrix& pts, int d) {
  const int n = static_cast<int>(pts.rows());
  std::vector<int> lab(n, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      if (used != d) return;
      double sse = 0.0;
      for (int c = 0; c < d; ++c) {
        Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(pts.cols());
        int cnt = 0;
        for (int k = 0; k < n; ++k) {
          if (lab[k] == c) {
            mu += pts.row(k);
            ++cnt;
          }
        }
        mu /= cnt;
        for (int k = 0; k < n; ++k) {
          if (lab[k] == c) sse += (pts.row(k) - mu).squaredNorm();
        }
      }
      best = std::min(best, sse);
      return;
    }
    // Canonical labelling: point i joins an existing cluster or opens the next one.
    for (int c = 0; c <= std::min(used, d - 1); ++c) {
      lab[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

// Per pixel: cast the ray through the pixel centre, intersect every
// triangle whose outward normal faces the camera (Möller-Trumbore in
// camera space), keep the nearest.
struct BruteRaster {
  std::vector<int> face;
  std::vector<double> depth;
};

inline BruteRaster brute_force_raster(const Mesh& mesh, const Camera& cam) {
  BruteRaster r;
  const std::size_t n = static_cast<std::size_t>(cam.width) * cam.height;
  r.face.assign(n, kNoFace);
  r.depth.assign(n, std::numeric_limits<double>::infinity());
  std::vector<Vec3> v(mesh.vertices.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cam.to_camera(mesh.vertices[i]);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir(((x + 0.5) - cam.cx) / cam.fx, -((y + 0.5) - cam.cy) / cam.fy, 1.0);
      const std::size_t idx = static_cast<std::size_t>(y) * cam.width + x;
      for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Vec3& a = v[mesh.faces[f][0]];
        const Vec3& b = v[mesh.faces[f][1]];
        const Vec3& c = v[mesh.faces[f][2]];
        if (a.z() <= 1e-9 || b.z() <= 1e-9 || c.z() <= 1e-9) continue;
        const Vec3& wa = mesh.vertices[mesh.faces[f][0]];
        const Vec3 wn = (mesh.vertices[mesh.faces[f][1]] - wa).cross(mesh.vertices[mesh.faces[f][2]] - wa);
        if (!(wn.dot(cam.position - wa) > 0.0)) continue;  // back facing or edge-on
        const Vec3 e1 = b - a, e2 = c - a;
        const Vec3 p = dir.cross(e2);
        const double det = e1.dot(p);
        const Vec3 s = -a;
        const double u = s.dot(p) / det;
        const Vec3 q = s.cross(e1);
        const double w = dir.dot(q) / det;
        if (u < 0.0 || w < 0.0 || u + w > 1.0) continue;
        const double t = e2.dot(q) / det;  // depth along z since dir.z = 1
        if (t < r.depth[idx]) {
          r.depth[idx] = t;
          r.face[idx] = static_cast<int>(f);
        }
      }
    }
  }
  return r;
}

}  // namespace volex::oracle
