#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volex/image.hpp"
#include "volex/raster.hpp"

namespace volex {

inline constexpr double kDefaultTau = 50.0;

// 1 - 1/2 * (1/n^2) * sum over ordered pairs x != x' of ||O(x) - O(x')||_1,
// with the uncovered mass as an extra background slot. Needs n >= 1.
double consistency_score(std::span<const FaceAttribution> attributions);

struct ConsistencyResult {
  std::optional<double> score;
  int present = 0;        // images in which the concept is present
  int class_images = 0;   // test images of the class
  std::string excluded;   // reason when score is absent
};

// Scores a concept from its per-image projections (only images where it is
// present). Concepts present in fewer than tau% of the class images, or in
// fewer than two images, are excluded rather than scored. Every projection
// must carry unit total mass (faces + uncovered).
ConsistencyResult three_d_consistency(std::span<const FaceAttribution> present_images,
                                      int class_images, double tau_percent = kDefaultTau);

struct LocalisationOptions {
  // Cross-method parity switch: count only pixels above this quantile of the
  // positive attribution as covered (1_h). Off by default.
  std::optional<double> support_quantile;
};

// (sum A+ 1_k + sum 1_h 1_k) / (sum A+ + sum 1_k) with A+ normalised to unit
// mass and 1_h = [A+ > 0]. Absent for an empty part.
std::optional<double> spatial_localisation(const Grid& positive_attribution, const Grid& part,
                                           const LocalisationOptions& options = {});

// Joint normalisation over all concept maps of one image, then the fraction
// of mass inside the object mask. Absent when every map is zero.
std::optional<double> object_coverage(std::span<const Grid> positive_maps, const Grid& object_mask);

// 100 * correct / total.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

}  // namespace volex
