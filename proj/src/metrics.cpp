#include "volex/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "volex/error.hpp"
#include "volex/keyvalue.hpp"

namespace volex {

namespace {

double l1_distance(const FaceAttribution& a, const FaceAttribution& b) {
  double d = std::abs(a.uncovered - b.uncovered);
  for (std::size_t f = 0; f < a.faces.size(); ++f) d += std::abs(a.faces[f] - b.faces[f]);
  return d;
}

}  // namespace

double consistency_score(std::span<const FaceAttribution> attributions) {
  const std::size_t n = attributions.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no attributions");
  for (const auto& a : attributions) {
    if (a.faces.size() != attributions.front().faces.size()) {
      throw Error(ErrorCode::kShapeMismatch, "face counts differ");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) total += l1_distance(attributions[i], attributions[j]);
    }
  }
  return 1.0 - 0.5 * total / static_cast<double>(n * n);
}

ConsistencyResult three_d_consistency(std::span<const FaceAttribution> present_images,
                                      int class_images, double tau_percent) {
  if (!(tau_percent >= 0.0 && tau_percent <= 100.0)) {
    throw Error(ErrorCode::kOutOfRange, "tau outside [0,100]");
  }
  const int present = static_cast<int>(present_images.size());
  if (class_images < present) {
    throw Error(ErrorCode::kInvalidArgument, "more present images than class images");
  }
  for (const auto& a : present_images) {
    if (std::abs(a.total() - 1.0) > 1e-6) {
      throw Error(ErrorCode::kInvalidArgument, "face attribution must carry unit mass");
    }
  }
  ConsistencyResult r;
  r.present = present;
  r.class_images = class_images;
  if (100.0 * present < tau_percent * class_images) {
    r.excluded = "present in " + std::to_string(present) + " of " + std::to_string(class_images) +
                 " images, below tau=" + format_double(tau_percent) + "%";
    return r;
  }
  if (present < 2) {
    r.excluded = "fewer than 2 qualifying images";
    return r;
  }
  r.score = consistency_score(present_images);
  return r;
}

std::optional<double> spatial_localisation(const Grid& positive_attribution, const Grid& part,
                                           const LocalisationOptions& options) {
  if (positive_attribution.width != part.width || positive_attribution.height != part.height) {
    throw Error(ErrorCode::kShapeMismatch, "attribution and part mask resolutions differ");
  }
  double part_area = 0.0;
  for (double v : part.values) part_area += v > 0.0 ? 1.0 : 0.0;
  if (part_area == 0.0) return std::nullopt;

  double mass = 0.0;
  for (double v : positive_attribution.values) mass += std::max(0.0, v);
  double threshold = 0.0;
  if (options.support_quantile) {
    std::vector<double> pos;
    for (double v : positive_attribution.values) {
      if (v > 0.0) pos.push_back(v);
    }
    if (!pos.empty()) {
      std::sort(pos.begin(), pos.end());
      const double at = *options.support_quantile * static_cast<double>(pos.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(at));
      const auto hi = std::min(lo + 1, pos.size() - 1);
      threshold = pos[lo] + (at - static_cast<double>(lo)) * (pos[hi] - pos[lo]);
    }
  }
  double weighted = 0.0, overlap = 0.0;
  for (std::size_t i = 0; i < part.values.size(); ++i) {
    const double a = std::max(0.0, positive_attribution.values[i]);
    const double in_part = part.values[i] > 0.0 ? 1.0 : 0.0;
    const double normalised = mass > 0.0 ? a / mass : 0.0;
    const bool support = options.support_quantile ? (a > 0.0 && a >= threshold) : a > 0.0;
    weighted += normalised * in_part;
    overlap += (support ? 1.0 : 0.0) * in_part;
  }
  const double denom = (mass > 0.0 ? 1.0 : 0.0) + part_area;
  return (weighted + overlap) / denom;
}

std::optional<double> object_coverage(std::span<const Grid> positive_maps, const Grid& object_mask) {
  if (positive_maps.empty()) throw Error(ErrorCode::kInvalidArgument, "no concept maps");
  double total = 0.0, inside = 0.0;
  for (const auto& m : positive_maps) {
    if (m.width != object_mask.width || m.height != object_mask.height) {
      throw Error(ErrorCode::kShapeMismatch, "concept map and object mask resolutions differ");
    }
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const double a = std::max(0.0, m.values[i]);
      total += a;
      if (object_mask.values[i] > 0.0) inside += a;
    }
  }
  if (total == 0.0) return std::nullopt;
  return inside / total;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::kInvalidArgument, "empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace volex
