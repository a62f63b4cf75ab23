#include "volex/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "volex/error.hpp"
#include "volex/keyvalue.hpp"

namespace volex {

const char* method_name(ExtractionMethod m) {
  switch (m) {
    case ExtractionMethod::kKMeans: return "kmeans";
    case ExtractionMethod::kNmf: return "nmf";
    case ExtractionMethod::kPca: return "pca";
  }
  return "?";
}

ExtractionMethod method_from_name(const std::string& name) {
  if (name == "kmeans") return ExtractionMethod::kKMeans;
  if (name == "nmf") return ExtractionMethod::kNmf;
  if (name == "pca") return ExtractionMethod::kPca;
  throw Error(ErrorCode::kInvalidArgument, "unknown extraction method '" + name + "'");
}

// ---------------------------------------------------------------- k-means

double clustering_sse(const Matrix& points, std::span<const int> labels, const Matrix& centroids) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sse += (points.row(i) - centroids.row(labels[i])).squaredNorm();
  }
  return sse;
}

namespace {

struct KMeansRun {
  Matrix centroids;
  std::vector<int> labels;
  std::vector<double> history;
  int iterations = 0;
  double sse = 0.0;
};

Matrix seed_plus_plus(const Matrix& g, int d, std::mt19937_64& rng) {
  const Eigen::Index n = g.rows();
  Matrix c(d, g.cols());
  std::vector<char> chosen(n, 0);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index idx = first(rng);
  c.row(0) = g.row(idx);
  chosen[idx] = 1;
  std::vector<double> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) dist[i] = (g.row(i) - c.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 1; k < d; ++k) {
    double total = 0.0;
    for (double v : dist) total += v;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      idx = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (dist[i] <= 0.0) continue;
        acc += dist[i];
        idx = i;
        if (acc > target) break;
      }
    } else {
      // All points coincide with chosen centres: take the first unused index.
      idx = std::find(chosen.begin(), chosen.end(), 0) - chosen.begin();
    }
    c.row(k) = g.row(idx);
    chosen[idx] = 1;
    for (Eigen::Index i = 0; i < n; ++i) dist[i] = std::min(dist[i], (g.row(i) - c.row(k)).squaredNorm());
  }
  return c;
}

// Nearest centroid per point, lowest index on ties.
void assign(const Matrix& g, const Matrix& c, std::vector<int>& labels) {
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    int best = 0;
    double best_d = (g.row(i) - c.row(0)).squaredNorm();
    for (Eigen::Index k = 1; k < c.rows(); ++k) {
      const double d = (g.row(i) - c.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    labels[i] = best;
  }
}

Matrix cluster_means(const Matrix& g, const std::vector<int>& labels, const Matrix& previous,
                     std::vector<int>& counts) {
  Matrix c = Matrix::Zero(previous.rows(), previous.cols());
  counts.assign(previous.rows(), 0);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    c.row(labels[i]) += g.row(i);
    ++counts[labels[i]];
  }
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    if (counts[k] > 0) c.row(k) /= counts[k];
  }
  return c;
}

// Moves, for each empty cluster in index order, the point farthest from its
// own centroid (taken from a cluster with at least two members).
void refill_empty(const Matrix& g, std::vector<int>& labels, Matrix& c, std::vector<int>& counts) {
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    if (counts[k] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = (g.row(i) - c.row(labels[i])).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) continue;  // unreachable when K >= D
    const int donor = labels[far];
    --counts[donor];
    c.row(donor) = (c.row(donor) * (counts[donor] + 1) - g.row(far)) / counts[donor];
    labels[far] = static_cast<int>(k);
    counts[k] = 1;
    c.row(k) = g.row(far);
  }
}

KMeansRun lloyd(const Matrix& g, int d, std::mt19937_64& rng, const KMeansOptions& opt) {
  KMeansRun run;
  run.centroids = seed_plus_plus(g, d, rng);
  run.labels.assign(g.rows(), 0);
  std::vector<int> counts;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    assign(g, run.centroids, run.labels);
    run.history.push_back(clustering_sse(g, run.labels, run.centroids));
    Matrix next = cluster_means(g, run.labels, run.centroids, counts);
    refill_empty(g, run.labels, next, counts);
    const double shift = (next - run.centroids).rowwise().norm().maxCoeff();
    run.centroids = std::move(next);
    run.iterations = it;
    if (shift < opt.tolerance) break;
  }
  // Final assignment against the converged centroids. A cluster emptied here
  // keeps its centroid; the next refill only happens inside the loop.
  std::vector<int> final_labels(run.labels.size());
  assign(g, run.centroids, final_labels);
  std::vector<int> tmp;
  const Matrix means = cluster_means(g, final_labels, run.centroids, tmp);
  bool empty = std::find(tmp.begin(), tmp.end(), 0) != tmp.end();
  if (!empty) {
    run.labels = std::move(final_labels);
    run.centroids = means;
  }
  run.sse = clustering_sse(g, run.labels, run.centroids);
  run.history.push_back(run.sse);
  return run;
}

}  // namespace

ConceptDictionary extract_kmeans(const Matrix& features, int concept_count, std::uint64_t seed,
                                 const KMeansOptions& options) {
  if (concept_count < 1) throw Error(ErrorCode::kInvalidArgument, "concept count must be >= 1");
  if (features.rows() < concept_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "K < D: " + std::to_string(features.rows()) + " points for " +
                    std::to_string(concept_count) + " clusters");
  }
  if (!features.allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite value");
  std::mt19937_64 rng(seed);
  KMeansRun best;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    KMeansRun run = lloyd(features, concept_count, rng, options);
    if (r == 0 || run.sse < best.sse) best = std::move(run);
  }
  ConceptDictionary d;
  d.method = ExtractionMethod::kKMeans;
  d.seed = seed;
  d.concepts = best.centroids;
  d.assignment = Matrix::Zero(features.rows(), concept_count);
  for (Eigen::Index i = 0; i < features.rows(); ++i) d.assignment(i, best.labels[i]) = 1.0;
  d.iterations = best.iterations;
  d.objective_history = std::move(best.history);
  d.reconstruction_error = std::sqrt(best.sse);
  return d;
}

std::vector<int> assignment_labels(const Matrix& assignment) {
  std::vector<int> labels(assignment.rows());
  for (Eigen::Index i = 0; i < assignment.rows(); ++i) {
    Eigen::Index j = 0;
    assignment.row(i).maxCoeff(&j);
    labels[i] = static_cast<int>(j);
  }
  return labels;
}

Matrix reconstruct(const ConceptDictionary& dict) {
  Matrix r = dict.assignment * dict.concepts;
  if (dict.mean.size() == r.cols()) r.rowwise() += dict.mean.transpose();
  return r;
}

// ---------------------------------------------------------------- NMF

ConceptDictionary extract_nmf(const Matrix& features, int concept_count, std::uint64_t seed,
                              const NmfOptions& options) {
  const Eigen::Index K = features.rows(), C = features.cols();
  if (concept_count < 1 || concept_count > std::min(K, C)) {
    throw Error(ErrorCode::kInvalidArgument, "D must be in [1, min(K, C)]");
  }
  if (!features.allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite value");
  ConceptDictionary d;
  d.method = ExtractionMethod::kNmf;
  d.seed = seed;
  Matrix g = features;
  if (g.minCoeff() < 0.0) {
    const auto negatives = (g.array() < 0.0).count();
    d.warnings.push_back("clamped " + std::to_string(negatives) + " negative entries to zero");
    std::clog << "warning: nmf: " << d.warnings.back() << '\n';
    g = g.cwiseMax(0.0);
  }
  constexpr double kTiny = 1e-12;
  std::mt19937_64 rng(seed);
  const double scale = std::sqrt(std::max(g.mean(), kTiny) / concept_count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix w(K, concept_count), h(concept_count, C);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * unit(rng);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = scale * unit(rng);

  double prev = (g - w * h).squaredNorm();
  d.objective_history.push_back(prev);
  for (int it = 1; it <= options.max_iterations; ++it) {
    h.array() *= (w.transpose() * g).array() / ((w.transpose() * w * h).array() + kTiny);
    w.array() *= (g * h.transpose()).array() / ((w * h * h.transpose()).array() + kTiny);
    const double obj = (g - w * h).squaredNorm();
    d.objective_history.push_back(obj);
    d.iterations = it;
    const double rel = std::abs(prev - obj) / std::max(prev, kTiny);
    prev = obj;
    if (rel < options.tolerance) break;
  }
  d.concepts = std::move(h);
  d.assignment = std::move(w);
  d.reconstruction_error = std::sqrt(prev);
  return d;
}

// ---------------------------------------------------------------- PCA

ConceptDictionary extract_pca(const Matrix& features, int concept_count) {
  const Eigen::Index K = features.rows(), C = features.cols();
  if (concept_count < 1 || concept_count > std::min(K, C)) {
    throw Error(ErrorCode::kInvalidArgument, "D exceeds rank bound min(K, C)");
  }
  if (!features.allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite value");
  ConceptDictionary d;
  d.method = ExtractionMethod::kPca;
  d.mean = features.colwise().mean().transpose();
  const Matrix centred = features.rowwise() - d.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::MatrixXd& v = svd.matrixV();
  d.concepts.resize(concept_count, C);
  d.explained_variance.resize(concept_count);
  for (int j = 0; j < concept_count; ++j) {
    Vector dir = v.col(j);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir[arg] < 0.0) dir = -dir;
    d.concepts.row(j) = dir.transpose();
    const double s = svd.singularValues()[j];
    d.explained_variance[j] = s * s / static_cast<double>(K);
  }
  d.assignment = centred * d.concepts.transpose();
  d.reconstruction_error = (features - reconstruct(d)).norm();
  return d;
}

// ---------------------------------------------------------------- diagnostics

double sparsity(const Matrix& weights) {
  if (weights.size() == 0) return 0.0;
  const auto zeros = (weights.array().abs() < kSparsityZero).count();
  return static_cast<double>(zeros) / static_cast<double>(weights.size());
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

void moments(const Matrix& x, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - mean.transpose();
  cov = centred.transpose() * centred / static_cast<double>(x.rows());
}

}  // namespace

double fdd(const Matrix& a, const Matrix& b) {
  if (a.rows() < 2 || b.rows() < 2) throw Error(ErrorCode::kInvalidArgument, "fdd needs at least 2 rows per set");
  if (a.cols() != b.cols()) throw Error(ErrorCode::kChannelMismatch, "fdd inputs differ in width");
  Eigen::VectorXd ma, mb;
  Eigen::MatrixXd ca, cb;
  moments(a, ma, ca);
  moments(b, mb, cb);
  const Eigen::MatrixXd ra = psd_sqrt(ca);
  Eigen::MatrixXd inner = ra * cb * ra;
  inner = 0.5 * (inner + inner.transpose());
  const double cross = psd_sqrt(inner).trace();
  return std::max(0.0, (ma - mb).squaredNorm() + ca.trace() + cb.trace() - 2.0 * cross);
}

namespace {

std::map<int, std::vector<Eigen::Index>> group(const Matrix& points, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "one label per point required");
  }
  std::map<int, std::vector<Eigen::Index>> clusters;
  for (Eigen::Index i = 0; i < points.rows(); ++i) clusters[labels[i]].push_back(i);
  if (clusters.size() < 2) throw Error(ErrorCode::kInvalidArgument, "at least two clusters required");
  return clusters;
}

}  // namespace

double silhouette(const Matrix& points, std::span<const int> labels) {
  const auto clusters = group(points, labels);
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto& own = clusters.at(labels[i]);
    if (own.size() == 1) continue;  // singleton scores 0
    double a = 0.0;
    for (auto j : own) a += (points.row(i) - points.row(j)).norm();
    a /= static_cast<double>(own.size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, members] : clusters) {
      if (label == labels[i]) continue;
      double m = 0.0;
      for (auto j : members) m += (points.row(i) - points.row(j)).norm();
      b = std::min(b, m / static_cast<double>(members.size()));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(points.rows());
}

double davies_bouldin(const Matrix& points, std::span<const int> labels) {
  const auto clusters = group(points, labels);
  std::vector<Eigen::RowVectorXd> centroids;
  std::vector<double> spread;
  for (const auto& [label, members] : clusters) {
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(points.cols());
    for (auto j : members) c += points.row(j);
    c /= static_cast<double>(members.size());
    double s = 0.0;
    for (auto j : members) s += (points.row(j) - c).norm();
    centroids.push_back(c);
    spread.push_back(s / static_cast<double>(members.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < centroids.size(); ++j) {
      if (i == j) continue;
      const double sep = (centroids[i] - centroids[j]).norm();
      if (sep == 0.0) throw Error(ErrorCode::kZeroSeparation, "zero separation");
      worst = std::max(worst, (spread[i] + spread[j]) / sep);
    }
    total += worst;
  }
  return total / static_cast<double>(centroids.size());
}

// ---------------------------------------------------------------- I/O

void save_dictionary(const ConceptDictionary& dict, const std::filesystem::path& manifest,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  const auto dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();
  KeyValueFile kv;
  kv.set("format", std::string("volex-dictionary 1"));
  kv.set("method", std::string(method_name(dict.method)));
  kv.set("seed", static_cast<long long>(dict.seed));
  kv.set("class", dict.class_id);
  kv.set("concepts_count", static_cast<long long>(dict.size()));
  kv.set("iterations", dict.iterations);
  kv.set("reconstruction_error", dict.reconstruction_error);
  kv.set("concepts", stem + ".concepts.cavt");
  kv.set("assignment", stem + ".assignment.cavt");
  write_tensor(matrix_to_tensor(dict.concepts), dir / (stem + ".concepts.cavt"));
  write_tensor(matrix_to_tensor(dict.assignment), dir / (stem + ".assignment.cavt"));
  if (dict.mean.size() > 0) {
    kv.set("mean", stem + ".mean.cavt");
    write_tensor(vector_to_tensor(dict.mean), dir / (stem + ".mean.cavt"));
  }
  if (dict.explained_variance.size() > 0) {
    kv.set("explained_variance",
           std::vector<double>(dict.explained_variance.data(),
                               dict.explained_variance.data() + dict.explained_variance.size()));
  }
  for (const auto& w : dict.warnings) kv.add("warning", w);
  for (const auto& [k, v] : extra) kv.set(k, v);
  kv.save(manifest);
}

ConceptDictionary load_dictionary(const std::filesystem::path& manifest) {
  const auto kv = KeyValueFile::load(manifest);
  if (kv.get("format") != "volex-dictionary 1") {
    throw Error(ErrorCode::kBadVersion, "unsupported dictionary format '" + kv.get("format") + "'");
  }
  const auto dir = manifest.parent_path();
  ConceptDictionary d;
  d.method = method_from_name(kv.get("method"));
  d.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
  d.class_id = static_cast<int>(kv.get_int("class"));
  d.iterations = static_cast<int>(kv.get_int("iterations"));
  d.reconstruction_error = kv.get_double("reconstruction_error");
  d.concepts = tensor_to_matrix(read_tensor(dir / kv.get("concepts")));
  d.assignment = tensor_to_matrix(read_tensor(dir / kv.get("assignment")));
  if (d.assignment.cols() != d.concepts.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "assignment width does not match concept count");
  }
  if (kv.has("mean")) d.mean = tensor_to_vector(read_tensor(dir / kv.get("mean")));
  if (kv.has("explained_variance")) {
    const auto ev = kv.get_doubles("explained_variance");
    d.explained_variance = Eigen::Map<const Vector>(ev.data(), static_cast<Eigen::Index>(ev.size()));
  }
  d.warnings = kv.get_all("warning");
  return d;
}

}  // namespace volex
