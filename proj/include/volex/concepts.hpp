#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volex/linalg.hpp"

namespace volex {

enum class ExtractionMethod { kKMeans, kNmf, kPca };

const char* method_name(ExtractionMethod m);
ExtractionMethod method_from_name(const std::string& name);

// Per-class concept dictionary. Gaussian features G (K×C) are approximated
// by assignment·concepts (+ mean for PCA).
struct ConceptDictionary {
  Matrix concepts;    // D×C, rows are concept vectors
  Matrix assignment;  // K×D
  int class_id = 0;
  ExtractionMethod method = ExtractionMethod::kKMeans;
  std::uint64_t seed = 0;
  int iterations = 0;
  double reconstruction_error = 0.0;  // Frobenius norm of the residual
  Vector mean;                        // PCA centering vector, empty otherwise
  Vector explained_variance;          // PCA only
  std::vector<double> objective_history;
  std::vector<std::string> warnings;

  Eigen::Index size() const { return concepts.rows(); }
  Eigen::Index channels() const { return concepts.cols(); }
};

inline constexpr int kDefaultConceptCount = 20;

struct KMeansOptions {
  int max_iterations = 300;
  double tolerance = 1e-6;  // max centroid shift
  int restarts = 1;         // best-of-n k-means++ runs, lowest SSE wins
};

// Lloyd iterations from k-means++ seeding. Empty clusters take the point
// farthest from its centroid; every tie goes to the lowest index.
ConceptDictionary extract_kmeans(const Matrix& features, int concept_count, std::uint64_t seed,
                                 const KMeansOptions& options = {});

// Within-cluster sum of squared distances for one-hot labels.
double clustering_sse(const Matrix& points, std::span<const int> labels, const Matrix& centroids);

struct NmfOptions {
  int max_iterations = 500;
  double tolerance = 1e-6;  // relative objective change
};

// Lee-Seung multiplicative updates on ||G - W H||_F^2. Negative inputs are
// clamped to zero with a warning.
ConceptDictionary extract_nmf(const Matrix& features, int concept_count, std::uint64_t seed,
                              const NmfOptions& options = {});

// Top principal directions of the centred features; the largest-magnitude
// entry of each direction is made positive.
ConceptDictionary extract_pca(const Matrix& features, int concept_count);

// One-hot label per row of a k-means assignment matrix.
std::vector<int> assignment_labels(const Matrix& assignment);

// Reconstruction assignment·concepts (+ mean).
Matrix reconstruct(const ConceptDictionary& dict);

inline constexpr double kSparsityZero = 1e-9;

// Fraction of entries with magnitude below kSparsityZero.
double sparsity(const Matrix& weights);

// Squared 2-Wasserstein distance between Gaussian moment fits of the rows of
// a and b (population covariance).
double fdd(const Matrix& a, const Matrix& b);

double silhouette(const Matrix& points, std::span<const int> labels);
double davies_bouldin(const Matrix& points, std::span<const int> labels);

// Manifest text + `<stem>.concepts.cavt` (D×C) + `<stem>.assignment.cavt` (K×D).
void save_dictionary(const ConceptDictionary& dict, const std::filesystem::path& manifest,
                     const std::vector<std::pair<std::string, std::string>>& extra = {});
ConceptDictionary load_dictionary(const std::filesystem::path& manifest);

}  // namespace volex
