#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mesh_fixture.hpp"
#include "oracles.hpp"
#include "test_util.hpp"
#include "volex/camera.hpp"
#include "volex/raster.hpp"
#include "volex/volume.hpp"

using namespace volex;

namespace {

Camera front_camera(Canvas canvas = {160, 128}) { return camera_from_pose(Pose{0, 0, 0, 15}, canvas); }

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size();) {
    std::size_t e = k;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
    for (std::size_t t = k; t <= e; ++t) r[idx[t]] = 0.5 * (k + e);
    k = e + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("cad axis remap") {
  Mesh m;
  m.vertices = {Vec3(1, 2, 3), Vec3(0, 0, 0), Vec3(-0.5, 4, 1e-3)};
  m.faces = {{0, 1, 2}};
  const auto r = cad_to_camera_axes(m);
  CHECK(r.vertices[0] == Vec3(1, 3, -2));
  CHECK(r.vertices[1] == Vec3(0, 0, 0));
  Mesh four = m;
  for (int i = 0; i < 4; ++i) four = cad_to_camera_axes(four);
  for (int i = 0; i < 3; ++i) CHECK((four.vertices[i] - m.vertices[i]).norm() <= 1e-12);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK((r.vertices[i] - r.vertices[j]).norm() == (m.vertices[i] - m.vertices[j]).norm());
}

TEST_CASE("camera: origin at the principal point, orthonormal axes") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(-3.0, 3.0), el(-1.5, 1.5), dist(2, 40);
  for (int t = 0; t < 100; ++t) {
    const Pose p{ang(rng), el(rng), ang(rng), dist(rng)};
    const auto cam = camera_from_pose(p);
    const auto o = cam.project(Vec3::Zero());
    CHECK(std::abs(o.x() - cam.cx) <= 1e-6);
    CHECK(std::abs(o.y() - cam.cy) <= 1e-6);
    CHECK(std::abs(cam.right.dot(cam.up)) <= 1e-9);
    CHECK(std::abs(cam.right.dot(cam.forward)) <= 1e-9);
    CHECK(std::abs(cam.up.dot(cam.forward)) <= 1e-9);
    CHECK(std::abs(cam.right.norm() - 1) <= 1e-9);
    CHECK(std::abs(cam.up.norm() - 1) <= 1e-9);
    CHECK(std::abs(cam.forward.norm() - 1) <= 1e-9);
    CHECK(cam.position.norm() == doctest::Approx(p.distance));
  }
}

TEST_CASE("camera: defaults") {
  const auto cam = camera_from_pose(default_view_pose());
  CHECK(cam.width == 800);
  CHECK(cam.height == 640);
  CHECK(cam.cx == 400);
  CHECK(cam.cy == 320);
  CHECK(cam.fx == 3000);
  CHECK(cam.fy == 3000);
  CHECK(cam.position.norm() == doctest::Approx(15.0));
  CHECK(cam.position.y() == doctest::Approx(15.0 * std::sin(radians(30))));
}

TEST_CASE("camera: elevation 90 degrees looks straight down") {
  const auto cam = camera_from_pose(Pose{radians(25), radians(90), 0, 15});
  CHECK((cam.position - Vec3(0, 15, 0)).norm() <= 1e-9);
  CHECK((cam.forward - Vec3(0, -1, 0)).norm() <= 1e-9);
}

TEST_CASE("camera: world up projects upwards without roll") {
  const auto cam = camera_from_pose(Pose{radians(30), radians(10), 0, 15});
  CHECK(cam.project(Vec3(0, 1, 0)).y() < cam.cy);
}

TEST_CASE("camera: doubling the canvas doubles pixel extents exactly") {
  const Pose p{radians(-40), radians(30), 0.1, 15};
  const auto a = camera_from_pose(p, {800, 640});
  const auto b = camera_from_pose(p, {1600, 1280});
  const Vec3 tri[3] = {Vec3(1, 0, 0), Vec3(0, 1.5, 0.2), Vec3(-0.3, 0, 1)};
  for (const auto& v : tri) {
    const Eigen::Vector2d pa = a.project(v) - Eigen::Vector2d(a.cx, a.cy);
    const Eigen::Vector2d pb = b.project(v) - Eigen::Vector2d(b.cx, b.cy);
    CHECK(pb.x() == 2 * pa.x());
    CHECK(pb.y() == 2 * pa.y());
  }
  const auto c = camera_from_pose(p, {800, 640}, 6000);
  for (const auto& v : tri) {
    const Eigen::Vector2d pa = a.project(v) - Eigen::Vector2d(a.cx, a.cy);
    const Eigen::Vector2d pc = c.project(v) - Eigen::Vector2d(c.cx, c.cy);
    CHECK(pc.x() == 2 * pa.x());
  }
  CHECK(volex::test::error_of([] { camera_from_pose(Pose{0, 0, 0, 0}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("rasterizer: one large facing triangle matches the brute-force count") {
  Mesh m;
  m.vertices = {Vec3(-2, -1.5, 0), Vec3(2, -1.5, 0), Vec3(0, 2, 0)};
  m.faces = {{0, 1, 2}};
  const auto cam = front_camera();
  const auto pfm = rasterize(m, cam);
  const auto oracle = oracle::brute_force_raster(m, cam);
  int brute = 0;
  for (int f : oracle.face) brute += f == 0;
  CHECK(pfm.covered() > 0);
  CHECK(pfm.covered() == brute);

  Mesh back = m;
  back.faces = {{0, 2, 1}};
  CHECK(rasterize(back, cam).covered() == 0);
}

TEST_CASE("rasterizer: nearer of two overlapping faces wins") {
  Mesh m;
  // Depth 10 (z = 5) first, depth 5 (z = 10) second.
  m.vertices = {Vec3(-2, -2, 5), Vec3(2, -2, 5), Vec3(0, 2, 5), Vec3(-1.5, -1.5, 10), Vec3(1.5, -1.5, 10),
                Vec3(0, 1.5, 10)};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  const auto cam = front_camera();
  const auto pfm = rasterize(m, cam);
  const auto far_only = rasterize(Mesh{m.vertices, {m.faces[0]}}, cam);
  const auto near_only = rasterize(Mesh{m.vertices, {m.faces[1]}}, cam);
  int contested = 0;
  for (std::size_t i = 0; i < pfm.face.size(); ++i) {
    if (far_only.face[i] != kNoFace && near_only.face[i] != kNoFace) {
      ++contested;
      CHECK(pfm.face[i] == 1);
      CHECK(pfm.depth[i] == doctest::Approx(5.0));
    }
  }
  CHECK(contested > 0);
  CHECK(pfm.at(0, 0) == kNoFace);
}

TEST_CASE("rasterizer: geometry behind the camera is culled") {
  Mesh m;
  m.vertices = {Vec3(-1, -1, 20), Vec3(1, -1, 20), Vec3(0, 1, 20)};
  m.faces = {{0, 1, 2}};
  CHECK(rasterize(m, front_camera()).covered() == 0);
}

TEST_CASE("rasterizer agrees with the ray-cast oracle on random meshes") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> nf(1, 20);
  std::uniform_real_distribution<double> ang(-3, 3), el(-1.2, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    const Mesh m = volex::test::random_triangle_soup(nf(rng), rng);
    const auto cam = camera_from_pose(Pose{ang(rng), el(rng), ang(rng), 15}, {96, 80});
    const auto pfm = rasterize(m, cam);
    const auto o = oracle::brute_force_raster(m, cam);
    int mismatches = 0;
    for (std::size_t i = 0; i < pfm.face.size(); ++i) {
      mismatches += pfm.face[i] != o.face[i];
      if (pfm.face[i] != kNoFace) {
        const auto& b = pfm.barycentric[i];
        CHECK(std::abs(b[0] + b[1] + b[2] - 1.0) <= 1e-6);
        CHECK(std::min({b[0], b[1], b[2]}) >= -1e-9);
        CHECK(pfm.depth[i] == doctest::Approx(o.depth[i]).epsilon(1e-9));
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("rasterizing an ellipsoid volume covers exactly one face per pixel") {
  const auto g = build_volume({ShapeKind::kEllipsoid, Vec3(3, 1, 1.5), {}});
  const auto cam = camera_from_pose(default_view_pose(), {200, 160});
  const auto pfm = rasterize(*g.mesh, cam);
  CHECK(pfm.covered() > 100);
  for (std::size_t i = 0; i < pfm.face.size(); ++i) {
    if (pfm.face[i] == kNoFace) CHECK(std::isinf(pfm.depth[i]));
  }
}

TEST_CASE("project_attribution examples") {
  const Mesh grid = volex::test::facing_grid(4, 2, 2.0, 1.0);
  REQUIRE(grid.faces.size() == 16);
  const auto cam = front_camera();
  const auto pfm = rasterize(grid, cam);

  auto mass_on = [&](auto pred) {
    Grid a(pfm.width, pfm.height);
    int n = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) n += pred(i);
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] = pred(i) ? 1.0 / n : 0.0;
    return a;
  };

  const auto on7 = project_attribution(mass_on([&](std::size_t i) { return pfm.face[i] == 7; }), pfm, 16);
  CHECK(on7.faces[7] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(on7.uncovered == 0.0);

  const auto bg = project_attribution(mass_on([&](std::size_t i) { return pfm.face[i] == kNoFace; }), pfm, 16);
  for (double v : bg.faces) CHECK(v == 0.0);
  CHECK(bg.uncovered == doctest::Approx(1.0).epsilon(1e-12));

  Grid half(pfm.width, pfm.height);
  const auto f3 = std::count(pfm.face.begin(), pfm.face.end(), 3);
  const auto none = std::count(pfm.face.begin(), pfm.face.end(), kNoFace);
  for (std::size_t i = 0; i < half.values.size(); ++i) {
    if (pfm.face[i] == 3) half.values[i] = 0.5 / f3;
    if (pfm.face[i] == kNoFace) half.values[i] = 0.5 / none;
  }
  const auto h = project_attribution(half, pfm, 16);
  CHECK(h.faces[3] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h.uncovered == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(volex::test::error_of([&] { project_attribution(Grid(3, 3), pfm, 16); }) == ErrorCode::kShapeMismatch);
  Grid neg(pfm.width, pfm.height);
  neg.values[0] = -1;
  CHECK(volex::test::error_of([&] { project_attribution(neg, pfm, 16); }) == ErrorCode::kOutOfRange);
}

TEST_CASE("projection mass accounting on random attributions") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  const auto g = build_volume({ShapeKind::kEllipsoid, Vec3(2, 1, 1), {}}, 300);
  for (int t = 0; t < 10; ++t) {
    const auto cam = camera_from_pose(Pose{u(rng) * 6, u(rng) - 0.5, u(rng), 15}, {120, 96});
    const auto pfm = rasterize(*g.mesh, cam);
    Grid a(120, 96);
    for (double& v : a.values) v = u(rng) < 0.3 ? u(rng) : 0.0;
    const auto fa = project_attribution(a, pfm, g.mesh->faces.size());
    CHECK(std::abs(fa.total() - a.sum()) <= 1e-9);
  }
}

TEST_CASE("resize keeps the total mass") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Grid a(10, 8);
  for (double& v : a.values) v = u(rng);
  for (auto [w, h] : {std::pair{80, 64}, std::pair{7, 5}, std::pair{10, 8}}) {
    const auto r = resize_mass_preserving(a, w, h);
    CHECK(r.sum() == doctest::Approx(a.sum()).epsilon(1e-12));
    CHECK(r.width == w);
    CHECK(r.height == h);
  }
  const auto same = resize_mass_preserving(a, 10, 8);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(same.values[i] == doctest::Approx(a.values[i]));
}

TEST_CASE("render_face_attribution") {
  const Mesh grid = volex::test::facing_grid(4, 2, 2.0, 1.0);
  const auto pfm = rasterize(grid, front_camera());

  FaceAttribution one;
  one.faces.assign(16, 0.0);
  one.faces[5] = 1.0;
  const auto img = render_face_attribution(one, pfm);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    CHECK(img.values[i] == doctest::Approx(pfm.face[i] == 5 ? 1.0 : 0.0));
  }

  FaceAttribution uniform;
  uniform.faces.assign(16, 0.3);
  const auto u = render_face_attribution(uniform, pfm);
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    if (pfm.face[i] != kNoFace) CHECK(u.values[i] == doctest::Approx(1.0));
  }

  FaceAttribution zero;
  zero.faces.assign(16, 0.0);
  for (double v : render_face_attribution(zero, pfm).values) CHECK(v == 0.0);
}

TEST_CASE("render then re-project preserves the face ranking") {
  const auto g = build_volume({ShapeKind::kEllipsoid, Vec3(2, 1, 1.2), {}}, 200);
  const auto pfm = rasterize(*g.mesh, camera_from_pose(default_view_pose(), {400, 320}));
  const std::size_t n = g.mesh->faces.size();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FaceAttribution tex;
  tex.faces.resize(n);
  for (double& v : tex.faces) v = u(rng);
  const auto img = render_face_attribution(tex, pfm);
  const auto back = project_attribution(img, pfm, n);
  std::vector<double> counts(n, 0.0);
  for (int f : pfm.face)
    if (f != kNoFace) counts[f] += 1.0;
  std::vector<double> a, b;
  for (std::size_t f = 0; f < n; ++f) {
    if (counts[f] == 0.0) continue;
    a.push_back(tex.faces[f]);
    b.push_back(back.faces[f] / counts[f]);
  }
  REQUIRE(a.size() > 20);
  CHECK(spearman(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("aggregate_face_attributions") {
  FaceAttribution a;
  a.faces = {0.0, 0.2, 0.6, 0.2};
  const FaceAttribution a1[] = {a};
  const auto single = aggregate_face_attributions(a1);
  const std::vector<double> expect = {0.0, 1.0 / 3.0, 1.0, 1.0 / 3.0};
  for (int i = 0; i < 4; ++i) CHECK(single.faces[i] == doctest::Approx(expect[i]).epsilon(1e-15));

  const FaceAttribution a2[] = {a, a};
  const auto twice = aggregate_face_attributions(a2);
  for (int i = 0; i < 4; ++i) CHECK(twice.faces[i] == doctest::Approx(single.faces[i]).epsilon(1e-15));

  FaceAttribution p, q;
  p.faces = {0.5, 0.5, 0.0, 0.0, 0.0};
  q.faces = {0.0, 0.0, 0.0, 1.0, 0.0};
  const FaceAttribution pq[] = {p, q};
  const auto u = aggregate_face_attributions(pq);
  for (int i : {0, 1, 3}) CHECK(u.faces[i] > 0.0);
  for (int i : {2, 4}) CHECK(u.faces[i] == 0.0);

  CHECK(volex::test::error_of([] { aggregate_face_attributions({}); }) == ErrorCode::kInvalidArgument);
  FaceAttribution short_one;
  short_one.faces = {1.0};
  const FaceAttribution mixed[] = {a, short_one};
  CHECK(volex::test::error_of([&] { aggregate_face_attributions(mixed); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("face attribution save/load") {
  volex::test::TempDir dir("faces");
  FaceAttribution a;
  a.faces = {0.25, 0.5, 0.125};
  a.uncovered = 0.125;
  save_face_attribution(a, dir / "c.faces");
  const auto back = load_face_attribution(dir / "c.faces");
  CHECK(back.faces == a.faces);
  CHECK(back.uncovered == a.uncovered);
}
