#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "volex/concepts.hpp"
#include "volex/config.hpp"
#include "volex/manifest.hpp"
#include "volex/matching.hpp"
#include "volex/metrics.hpp"
#include "volex/raster.hpp"
#include "volex/volume.hpp"

namespace volex {

// Visibility filter, then the configured extraction method with D concepts.
ConceptDictionary extract_dictionary(const NeuralObjectVolume& volume, const RunConfig& config);

// sparsity, reconstruction FDD and, for hard assignments, silhouette and
// Davies-Bouldin on the filtered Gaussian features.
std::vector<std::pair<std::string, std::string>> dictionary_diagnostics(const ConceptDictionary& dict,
                                                                        const Matrix& features);

std::vector<ConceptDictionary> extract_dictionaries(const EvalManifest& manifest, const RunConfig& config);

// Writes class<y>.dict per class into `dir`, with diagnostics and the config.
void save_dictionaries(std::span<const ConceptDictionary> dicts, const EvalManifest& manifest,
                       const RunConfig& config, const std::filesystem::path& dir);
std::vector<ConceptDictionary> load_dictionaries(const std::filesystem::path& dir, int classes);

struct ImagePrediction {
  std::string name;
  int label = 0;
  int predicted = 0;
  std::vector<double> scores;
  std::vector<double> confidence;
};

std::vector<ImagePrediction> classify_manifest(const EvalManifest& manifest,
                                               std::span<const ConceptDictionary> dicts,
                                               const RunConfig& config, bool occluded = false);
double prediction_accuracy(std::span<const ImagePrediction> predictions);

struct ConceptEvaluation {
  ConceptRef id;
  ConsistencyResult consistency;
  std::vector<std::optional<double>> localisation;  // per manifest part, mean over present images
  std::optional<double> importance;
  std::vector<FaceAttribution> projections;          // per present image, unit mass
};

struct ImageEvaluation {
  std::string name;
  int label = 0;
  int predicted = 0;
  std::vector<double> confidence;
  std::optional<double> coverage;
  double conservation_drift = 0.0;
  std::vector<int> present;  // concept indices of the true class present in the image
};

struct EvaluationReport {
  RunConfig config;
  std::vector<PartInfo> parts;
  double accuracy = 0.0;
  std::optional<double> occluded_accuracy;
  std::vector<ImageEvaluation> images;
  std::vector<ConceptEvaluation> concepts;
  std::optional<double> mean_consistency;
  std::optional<double> mean_localisation;
  std::optional<double> mean_coverage;
  int excluded_concepts = 0;
};

// Attribution target is the true label. A concept is present in an image when
// it wins the global match at some pixel with positive R_phi.
EvaluationReport evaluate_manifest(const EvalManifest& manifest, std::span<const ConceptDictionary> dicts,
                                   const RunConfig& config);

std::string report_to_json(const EvaluationReport& report);
std::string report_to_text(const EvaluationReport& report);

// Positive, unit-mass attribution resized to the projection canvas.
Grid canvas_attribution(const Grid& positive_unit, Canvas canvas);

Mesh load_projection_mesh(const std::filesystem::path& path, bool cad_axes);

}  // namespace volex
