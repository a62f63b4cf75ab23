// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mesh_fixture.hpp"
#include "oracles.hpp"
#include "relevance_fixture.hpp"
#include "test_util.hpp"
#include "volex/fixture.hpp"
#include "volex/keyvalue.hpp"
#include "volex/metrics.hpp"
#include "volex/pipeline.hpp"

using namespace volex;

namespace {

// Tolerances and budgets.
constexpr double kConservationTol = 1e-4;
constexpr double kConservationSeconds = 30.0;
constexpr double kMatchingTol = 1e-6;
constexpr double kReductionTol = 1e-9;
constexpr double kSparsityTol = 1e-12;
constexpr double kMetricTol = 1e-9;
constexpr double kBarycentricTol = 1e-6;
constexpr double kMassTol = 1e-9;
constexpr double kSseTol = 1e-9;
// Ten restarts miss the optimum on roughly 1.7% of random instances; fifty
// showed no misses in 2000.
constexpr int kRestarts = 50;
constexpr int kBaselineRestarts = 10;
constexpr double kEndToEndSeconds = 120.0;
constexpr double kOccludedAccuracyFloor = 80.0;

struct Outcome {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) { return format_double(v); }

Outcome conservation() {
  const auto t0 = Clock::now();
  const NetworkSpec spec = reference_network();
  std::mt19937_64 rng(1);
  const auto dicts = test::random_dictionaries(3, 20, spec.feature_channels(), rng);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const FeatureMap x = test::random_features(64, 64, spec.input_channels, rng);
    const auto run = test::run_attribution(spec, x, dicts);
    const auto& st = run.attribution.state;
    const double input_total = st.input.sum() + st.total_leakage();
    worst = std::max(worst, std::abs(input_total - st.target) / std::abs(st.target));
    worst = std::max(worst, conservation_report(st).drift);
  }
  const double secs = seconds_since(t0);
  return {worst <= kConservationTol && secs < kConservationSeconds,
          "max relative drift " + num(worst) + " over 100 inputs (tol " + num(kConservationTol) + "), " +
              num(std::round(secs * 10) / 10) + "s (limit " + num(kConservationSeconds) + "s)"};
}

Outcome matching_conservation() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int pixels = 0;
  for (int n = 0; n < 10; ++n) {
    const FeatureMap f = test::random_features(10, 10, 12, rng);
    const auto dicts = test::random_dictionaries(3, 6, 12, rng);
    const MatchResult m = match_concepts(f, dicts);
    const Attribution a = attribute_features(f, dicts, m, m.predicted);
    for (int i = 0; i < f.pixels(); ++i, ++pixels) {
      double s = 0.0;
      for (double v : a.state.features.pixel(i)) s += v;
      worst = std::max(worst, std::abs(s - a.state.phi.values[i]));
    }
  }
  return {worst <= kMatchingTol && pixels == 1000,
          "max |sum_c R_F - R_phi| " + num(worst) + " on " + std::to_string(pixels) + " pixels (tol " +
              num(kMatchingTol) + ")"};
}

Outcome reduction_identity() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> classes(2, 4), target(6, 60), channels(3, 16), side(2, 8);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const int ny = classes(rng), c = channels(rng);
    std::vector<NeuralObjectVolume> vols;
    std::vector<ConceptDictionary> dicts;
    for (int y = 0; y < ny; ++y) {
      NovGeometry g = build_volume(ShapeSpec{ShapeKind::kSphere, Vec3(1, 1, 1), std::nullopt}, target(rng));
      const int k = static_cast<int>(g.count());
      vols.push_back(attach_features(std::move(g), test::random_matrix(k, c, rng), y));
      ConceptDictionary d;
      d.concepts = vols.back().features;
      d.class_id = y;
      dicts.push_back(std::move(d));
    }
    const FeatureMap f = test::random_features(side(rng), side(rng), c, rng);
    const auto nov = novum_score(f, vols);
    const auto m = match_concepts(f, dicts);
    for (int y = 0; y < ny; ++y) worst = std::max(worst, std::abs(nov[y] - m.scores[y]));
  }
  return {worst <= kReductionTol, "max |s_concept - s_novum| " + num(worst) + " on 100 instances (tol " +
                                      num(kReductionTol) + ")"};
}

Outcome kmeans_sparsity() {
  std::mt19937_64 rng(4);
  const Matrix g = test::random_matrix(300, 32, rng);
  const double km = sparsity(extract_kmeans(g, 20, 42).assignment);
  const double pca = sparsity(extract_pca(g, 20).assignment);
  return {std::abs(km - 0.95) <= kSparsityTol && std::abs(pca) <= kSparsityTol,
          "k-means D=20 sparsity " + num(km) + " (want 0.95), PCA " + num(pca) + " (want 0)"};
}

FaceAttribution faces(std::vector<double> v, double uncovered = 0.0) {
  FaceAttribution f;
  f.faces = std::move(v);
  f.uncovered = uncovered;
  return f;
}

Outcome consistency_suite() {
  Outcome o;
  auto check = [&](const std::string& name, double got, double want) {
    if (std::abs(got - want) > kMetricTol) {
      o.ok = false;
      o.detail += name + "=" + num(got) + " ";
    }
  };
  const std::vector<FaceAttribution> same = {faces({0.2, 0.3, 0.5}), faces({0.2, 0.3, 0.5})};
  const std::vector<FaceAttribution> disjoint = {faces({1, 0}), faces({0, 1})};
  const std::vector<FaceAttribution> half = {faces({1, 0}), faces({0.5, 0.5})};
  check("identical", *three_d_consistency(same, 2).score, 1.0);
  check("disjoint", *three_d_consistency(disjoint, 2).score, 0.5);
  check("half-overlap", *three_d_consistency(half, 2).score, 0.75);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> count(2, 8), nfaces(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int fuzzed = 0;
  for (int t = 0; t < 2000; ++t) {
    const int n = count(rng), nf = nfaces(rng);
    std::vector<FaceAttribution> items;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(nf);
      double s = 0.0;
      for (double& x : v) s += (x = u(rng) < 0.3 ? 0.0 : u(rng));
      double unc = u(rng) < 0.5 ? u(rng) : 0.0;
      s += unc;
      if (s == 0.0) {
        v[0] = 1.0;
        s = 1.0;
      }
      for (double& x : v) x /= s;
      items.push_back(faces(v, unc / s));
    }
    const double score = *three_d_consistency(items, n).score;
    if (score < 1.0 / n - kMetricTol || score > 1.0 + kMetricTol) {
      o.ok = false;
      o.detail += "fuzz out of range n=" + std::to_string(n) + " score=" + num(score) + " ";
    }
    ++fuzzed;
  }
  o.detail = (o.ok ? "1.0 / 0.5 / 0.75 exact, " : o.detail) + std::to_string(fuzzed) + " fuzzed sets in [1/n, 1]";
  return o;
}

Grid grid(int w, int h, std::vector<double> v) {
  Grid g(w, h);
  g.values = std::move(v);
  return g;
}

Outcome localisation_coverage_suite() {
  Outcome o;
  auto check = [&](const std::string& name, std::optional<double> got, double want) {
    if (!got || std::abs(*got - want) > kMetricTol) {
      o.ok = false;
      o.detail += name + "=" + (got ? num(*got) : std::string("none")) + " ";
    }
  };
  // 4x2 canvas
  const Grid part4 = grid(4, 2, {1, 1, 0, 0, 1, 1, 0, 0});
  check("sl-exact", spatial_localisation(grid(4, 2, {.25, .25, 0, 0, .25, .25, 0, 0}), part4), 1.0);
  check("sl-disjoint", spatial_localisation(grid(4, 2, {0, 0, .5, .5, 0, 0, 0, 0}), grid(4, 2, {1, 1, 0, 0, 0, 0, 0, 0})), 0.0);
  check("sl-half", spatial_localisation(grid(4, 2, {.25, .25, .25, .25, 0, 0, 0, 0}), grid(4, 2, {1, 1, 0, 0, 0, 0, 0, 0})),
        2.5 / 3.0);

  const Grid mask = grid(4, 2, {1, 1, 0, 0, 1, 1, 0, 0});
  const std::vector<Grid> inside = {grid(4, 2, {.3, .2, 0, 0, .1, .4, 0, 0})};
  check("cov-inside", object_coverage(inside, mask), 1.0);
  const std::vector<Grid> split = {grid(4, 2, {.5, 0, 0, 0, 0, 0, 0, 0}), grid(4, 2, {0, 0, 0, .5, 0, 0, 0, 0})};
  check("cov-half", object_coverage(split, mask), 0.5);
  check("cov-full-mask", object_coverage(split, Grid(4, 2, 1.0)), 1.0);
  if (o.ok) o.detail = "3 localisation and 3 coverage cases within " + num(kMetricTol);
  return o;
}

Outcome raster_oracle() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> nf(1, 20);
  std::uniform_real_distribution<double> ang(-3.1, 3.1), el(-1.3, 1.3);
  long mismatched = 0, covered = 0;
  double bary = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Mesh m = test::random_triangle_soup(nf(rng), rng);
    const Camera cam = camera_from_pose(Pose{ang(rng), el(rng), ang(rng), 15}, {120, 96});
    const PixelFaceMap pfm = rasterize(m, cam);
    const auto ref = oracle::brute_force_raster(m, cam);
    for (std::size_t i = 0; i < pfm.face.size(); ++i) {
      mismatched += pfm.face[i] != ref.face[i];
      if (pfm.face[i] != kNoFace) {
        ++covered;
        const auto& b = pfm.barycentric[i];
        bary = std::max(bary, std::abs(b[0] + b[1] + b[2] - 1.0));
      }
    }
  }
  return {mismatched == 0 && covered > 0 && bary <= kBarycentricTol,
          std::to_string(mismatched) + " mismatched pixels over 50 meshes (" + std::to_string(covered) +
              " covered), max barycentric error " + num(bary)};
}

Outcome mass_accounting() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0), ang(-3.1, 3.1), el(-1.3, 1.3);
  double worst = 0.0;
  int cases = 0;
  auto account = [&](const Grid& a, const PixelFaceMap& pfm, std::size_t n) {
    const FaceAttribution fa = project_attribution(a, pfm, n);
    worst = std::max(worst, std::abs(fa.total() - a.sum()));
    ++cases;
  };
  for (int t = 0; t < 50; ++t) {
    const Mesh m = test::random_triangle_soup(1 + t % 20, rng);
    const Camera cam = camera_from_pose(Pose{ang(rng), el(rng), ang(rng), 15}, {120, 96});
    const PixelFaceMap pfm = rasterize(m, cam);
    Grid a(120, 96);
    for (double& v : a.values) v = u(rng) < 0.5 ? 0.0 : u(rng);
    const double s = a.sum();
    for (double& v : a.values) v /= s;
    account(a, pfm, m.face_count());
    // Low-resolution map resized to the canvas first.
    Grid small(15, 12);
    for (double& v : small.values) v = u(rng);
    const double ss = small.sum();
    for (double& v : small.values) v /= ss;
    const Grid big = resize_mass_preserving(small, 120, 96);
    worst = std::max(worst, std::abs(big.sum() - 1.0));
    account(big, pfm, m.face_count());
  }
  const NovGeometry g = build_volume(ShapeSpec{ShapeKind::kEllipsoid, Vec3(1.2, 0.5, 0.7), std::nullopt});
  const PixelFaceMap pfm = rasterize(*g.mesh, camera_from_pose(default_view_pose()));
  Grid a(800, 640);
  for (double& v : a.values) v = u(rng);
  const double total = a.sum();
  for (double& v : a.values) v /= total;
  account(a, pfm, g.mesh->face_count());
  return {worst <= kMassTol, "max |faces + uncovered - input| " + num(worst) + " over " + std::to_string(cases) +
                                 " projections (tol " + num(kMassTol) + ")"};
}

Outcome clustering_oracle() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> npts(3, 8);
  double worst = 0.0;
  int baseline_misses = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = npts(rng);
    std::uniform_int_distribution<int> dk(2, std::min(4, n - 1));
    const int d = dk(rng);
    const Matrix pts = test::random_matrix(n, 2, rng);
    const double best = oracle::exhaustive_min_sse(pts, d);
    auto sse_with = [&](int restarts) {
      KMeansOptions o;
      o.restarts = restarts;
      const ConceptDictionary dict = extract_kmeans(pts, d, 100 + t, o);
      return clustering_sse(pts, assignment_labels(dict.assignment), dict.concepts);
    };
    worst = std::max(worst, std::abs(sse_with(kRestarts) - best));
    baseline_misses += sse_with(kBaselineRestarts) - best > kSseTol;
  }
  return {worst <= kSseTol, "max |SSE - exhaustive optimum| " + num(worst) + " on 20 instances with " +
                                std::to_string(kRestarts) + " restarts (tol " + num(kSseTol) + "); " +
                                std::to_string(kBaselineRestarts) + " restarts missed " +
                                std::to_string(baseline_misses) + " of 20"};
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  test::TempDir dir("acceptance");
  const RunConfig config;
  FixtureOptions fo;  // seed 42, 3 classes, 10 images per class
  const EvalManifest m = load_eval_manifest(generate_fixture(fo, config, dir / "fixture"));
  const auto dicts = extract_dictionaries(m, config);
  const EvaluationReport rep = evaluate_manifest(m, dicts, config);
  const double secs = seconds_since(t0);
  const double occ = rep.occluded_accuracy.value_or(0.0);
  return {rep.accuracy == 100.0 && occ >= kOccludedAccuracyFloor && secs < kEndToEndSeconds,
          "accuracy " + num(rep.accuracy) + "%, occluded " + num(occ) + "% (floor " + num(kOccludedAccuracyFloor) +
              "%), " + num(std::round(secs * 10) / 10) + "s (limit " + num(kEndToEndSeconds) + "s)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"relevance conservation on the reference network", conservation},
      {"matching-layer conservation", matching_conservation},
      {"reduction to object-volume scores", reduction_identity},
      {"k-means and PCA sparsity", kmeans_sparsity},
      {"3-D consistency analytic cases and fuzzing", consistency_suite},
      {"localisation and coverage analytic cases", localisation_coverage_suite},
      {"rasterizer vs brute-force oracle", raster_oracle},
      {"projection mass accounting", mass_accounting},
      {"restarted k-means vs exhaustive partitions", clustering_oracle},
      {"end-to-end synthetic fixture", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.ok;
    std::printf("%s %zu %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
