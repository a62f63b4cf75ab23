#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "volex/concepts.hpp"
#include "volex/feature_map.hpp"
#include "volex/volume.hpp"

namespace volex {

struct MatchOptions {
  // Unit-normalise pixel features and concept rows before the dot product,
  // which makes the similarity a cosine.
  bool normalize = true;
  double temperature = 0.07;
};

struct ConceptRef {
  int cls = 0;
  int index = 0;
  bool operator==(const ConceptRef&) const = default;
};

struct MatchResult {
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<double> scores;           // s_y
  std::vector<int> best_concept;        // [class * pixels + i], winner within the class
  std::vector<double> best_similarity;  // [class * pixels + i]
  std::vector<ConceptRef> winner;       // global winner per pixel
  std::vector<double> winner_similarity;
  int predicted = 0;
  std::vector<double> confidence;

  int pixels() const { return height * width; }
  int class_concept(int cls, int pixel) const { return best_concept[static_cast<std::size_t>(cls) * pixels() + pixel]; }
  double class_similarity(int cls, int pixel) const { return best_similarity[static_cast<std::size_t>(cls) * pixels() + pixel]; }
};

// Rows scaled to unit norm; zero rows stay zero.
Matrix normalize_rows(const Matrix& m);

// Dense-volume score: s_y = sum_i max_k <f_i, g_y^(k)>.
std::vector<double> novum_score(const FeatureMap& features,
                                std::span<const NeuralObjectVolume> volumes,
                                const MatchOptions& options = {});

// Concept score s_y = sum_i max_j <f_i, h_y^(j)> together with the per-pixel
// winners. Ties: lowest concept index, then lowest class index.
MatchResult match_concepts(const FeatureMap& features,
                           std::span<const ConceptDictionary> dictionaries,
                           const MatchOptions& options = {});

// Numerically stable softmax of scores / temperature.
std::vector<double> softmax(std::span<const double> scores, double temperature);

// argmax (lowest class on ties) and softmax confidence.
std::pair<int, std::vector<double>> classify(const MatchResult& result, double temperature);

// Scores (classes), winners (H×W×2 as class, concept) and confidence tensors
// under `<stem>.scores.cavt`, `<stem>.winners.cavt`, `<stem>.confidence.cavt`.
void save_match_result(const MatchResult& result, const std::filesystem::path& stem);

}  // namespace volex
