#include "volex/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "volex/error.hpp"

namespace volex {

Matrix normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double n = out.row(r).norm();
    if (n > 0.0) out.row(r) /= n;
  }
  return out;
}

namespace {

using ConstRowMap = Eigen::Map<const Matrix>;

// Per-pixel similarity against every row of `bank` (P×rows).
Matrix similarities(const FeatureMap& f, const Matrix& bank) {
  ConstRowMap pixels(f.values.data(), f.pixels(), f.channels);
  return pixels * bank.transpose();
}

FeatureMap prepared_features(const FeatureMap& f, const MatchOptions& options) {
  return options.normalize && !f.unit_norm ? normalize_features(f) : f;
}

}  // namespace

std::vector<double> novum_score(const FeatureMap& features,
                                std::span<const NeuralObjectVolume> volumes,
                                const MatchOptions& options) {
  const FeatureMap f = prepared_features(features, options);
  std::vector<double> scores;
  scores.reserve(volumes.size());
  for (const auto& v : volumes) {
    if (v.channels() != f.channels) {
      throw Error(ErrorCode::kChannelMismatch,
                  "volume of class " + std::to_string(v.class_id) + " has " +
                      std::to_string(v.channels()) + " channels, features have " +
                      std::to_string(f.channels));
    }
    if (v.features.rows() == 0) throw Error(ErrorCode::kEmptyVolume, "empty volume");
    const Matrix bank = options.normalize ? normalize_rows(v.features) : v.features;
    const Matrix sim = similarities(f, bank);
    double s = 0.0;
    for (Eigen::Index i = 0; i < sim.rows(); ++i) s += sim.row(i).maxCoeff();
    scores.push_back(s);
  }
  return scores;
}

MatchResult match_concepts(const FeatureMap& features,
                           std::span<const ConceptDictionary> dictionaries,
                           const MatchOptions& options) {
  if (dictionaries.empty()) throw Error(ErrorCode::kEmptyDictionary, "no dictionaries");
  const FeatureMap f = prepared_features(features, options);
  MatchResult r;
  r.height = f.height;
  r.width = f.width;
  r.classes = static_cast<int>(dictionaries.size());
  const int P = f.pixels();
  r.scores.assign(dictionaries.size(), 0.0);
  r.best_concept.assign(dictionaries.size() * P, 0);
  r.best_similarity.assign(dictionaries.size() * P, 0.0);

  for (std::size_t y = 0; y < dictionaries.size(); ++y) {
    const auto& d = dictionaries[y];
    if (d.size() == 0) throw Error(ErrorCode::kEmptyDictionary, "empty dictionary for class " + std::to_string(y));
    if (d.channels() != f.channels) {
      throw Error(ErrorCode::kChannelMismatch,
                  "dictionary of class " + std::to_string(y) + " has " +
                      std::to_string(d.channels()) + " channels, features have " +
                      std::to_string(f.channels));
    }
    const Matrix bank = options.normalize ? normalize_rows(d.concepts) : d.concepts;
    const Matrix sim = similarities(f, bank);
    double s = 0.0;
    for (int i = 0; i < P; ++i) {
      int j = 0;
      double best = sim(i, 0);
      for (int k = 1; k < sim.cols(); ++k) {
        if (sim(i, k) > best) {
          best = sim(i, k);
          j = k;
        }
      }
      r.best_concept[y * P + i] = j;
      r.best_similarity[y * P + i] = best;
      s += best;
    }
    r.scores[y] = s;
  }

  r.winner.resize(P);
  r.winner_similarity.resize(P);
  for (int i = 0; i < P; ++i) {
    ConceptRef w{0, r.class_concept(0, i)};
    double ws = r.class_similarity(0, i);
    for (int y = 1; y < r.classes; ++y) {
      const double s = r.class_similarity(y, i);
      const int j = r.class_concept(y, i);
      if (s > ws || (s == ws && j < w.index)) {
        w = {y, j};
        ws = s;
      }
    }
    r.winner[i] = w;
    r.winner_similarity[i] = ws;
  }
  auto [pred, conf] = classify(r, options.temperature);
  r.predicted = pred;
  r.confidence = std::move(conf);
  return r;
}

std::vector<double> softmax(std::span<const double> scores, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double hi = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - hi) / temperature);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::pair<int, std::vector<double>> classify(const MatchResult& result, double temperature) {
  if (result.scores.empty()) throw Error(ErrorCode::kInvalidArgument, "no classes to classify");
  const auto best = std::max_element(result.scores.begin(), result.scores.end());
  return {static_cast<int>(best - result.scores.begin()), softmax(result.scores, temperature)};
}

void save_match_result(const MatchResult& result, const std::filesystem::path& stem) {
  const auto base = stem.string();
  std::vector<float> scores(result.scores.begin(), result.scores.end());
  write_tensor(Tensor({static_cast<std::uint32_t>(scores.size())}, scores), base + ".scores.cavt");
  std::vector<float> winners;
  winners.reserve(result.winner.size() * 2);
  for (const auto& w : result.winner) {
    winners.push_back(static_cast<float>(w.cls));
    winners.push_back(static_cast<float>(w.index));
  }
  write_tensor(Tensor({static_cast<std::uint32_t>(result.height),
                       static_cast<std::uint32_t>(result.width), 2},
                      winners),
               base + ".winners.cavt");
  std::vector<float> conf(result.confidence.begin(), result.confidence.end());
  write_tensor(Tensor({static_cast<std::uint32_t>(conf.size())}, conf), base + ".confidence.cavt");
}

}  // namespace volex
