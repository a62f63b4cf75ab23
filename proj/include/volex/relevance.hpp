#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volex/concepts.hpp"
#include "volex/feature_map.hpp"
#include "volex/image.hpp"
#include "volex/matching.hpp"
#include "volex/network.hpp"

namespace volex {

inline constexpr double kDefaultEpsilon = 1e-6;

// kScore seeds R_phi(i) with the target class's winning similarity at pixel
// i, so the seeds sum to s_y. kSoftmax scales those seeds by the class's
// softmax confidence.
enum class SeedMode { kScore, kSoftmax };

struct LrpOptions {
  double epsilon = kDefaultEpsilon;
  SeedMode seed = SeedMode::kScore;
  // Drop (and ledger) relevance that lands on padded positions of a merged
  // branch. Disabling it only exists to reproduce leakage in tests.
  bool mask_padding = true;
  MatchOptions match;
};

// Epsilon rule for a linear map out_j = sum_i a_i w_ij (bias excluded):
//   R_i = sum_j a_i w_ij / (z_j + eps * sign(z_j)) * R_j,   sign(0) = +1.
// `weights` is I×J.
std::vector<double> lrp_epsilon(std::span<const double> inputs, const Matrix& weights,
                                std::span<const double> relevance_out, double epsilon);

struct ConcatSplit {
  FeatureMap merged;  // relevance of the merged branch at its pre-padding grid
  FeatureMap source;  // relevance of the skip source
  double leakage = 0.0;  // relevance found on padded positions
};

// Splits R_U = [merged | source] along channels. Positions whose `valid` flag
// is 0 were padding; their relevance is dropped and reported as leakage. When
// mask_padding is false the same relevance disappears without being reported.
ConcatSplit lrp_concat_split(const FeatureMap& relevance, int first_channels,
                             std::span<const std::uint8_t> valid, int merged_height,
                             int merged_width, bool mask_padding = true);

// Nearest-neighbour upsampling backward: each source pixel receives the sum
// of its factor×factor replicas.
FeatureMap lrp_upsample(const FeatureMap& relevance, int factor);

// R_F(i,c) = R_phi(i) * (f_i ⊙ h_i)(c) / (sum_c (f_i ⊙ h_i)(c) + eps*sign).
// `matched` holds the matched concept vector h_i for every pixel (P×C).
FeatureMap lrp_matching(const FeatureMap& features, const Matrix& matched,
                        std::span<const double> relevance_phi, double epsilon);

// Epsilon-rule backward through a convolution.
FeatureMap lrp_conv(const ConvLayer& conv, const FeatureMap& input, const FeatureMap& relevance,
                    double epsilon);

struct LayerSum {
  std::string label;
  double sum = 0.0;
  double leakage_so_far = 0.0;
};

struct RelevanceState {
  double target = 0.0;             // R_{y*}: total seeded relevance
  Grid phi;                         // R_phi on the feature grid
  std::vector<int> concept_of;      // target-class concept matched at each feature pixel
  FeatureMap features;              // R_{F_x}
  std::vector<FeatureMap> layers;   // accumulated relevance on each layer output
  FeatureMap input;                 // relevance on the network input (or F_x)
  std::vector<double> leakage;      // per layer; nonzero only for merges with padding
  std::vector<LayerSum> sums;       // frontier sums from R_phi down to the input
  double total_leakage() const;
};

struct AttributionMap {
  ConceptRef concept_id;
  Grid relevance;  // A(x,h) at input resolution, summed over input channels

  // A+ = max(0, A); normalised so it sums to one when the mass is positive.
  Grid positive(bool normalize = true) const;
};

struct Attribution {
  RelevanceState state;
  Grid total;  // input relevance summed over channels
  std::vector<AttributionMap> concepts;  // one per concept of the target class
};

// Full NOV-aware propagation: seeds R_phi from the target class, runs
// lrp_matching on the (normalised) features, then walks the backbone in
// reverse. One attribution map per target-class concept is produced by
// propagating only the R_phi of the pixels matched to that concept.
Attribution attribute(const NetworkSpec& spec, const ActivationTrace& trace,
                      std::span<const ConceptDictionary> dictionaries, const MatchResult& match,
                      int target_class, const LrpOptions& options = {});

// Same, for a feature map without a backbone: maps live on the feature grid.
Attribution attribute_features(const FeatureMap& features,
                               std::span<const ConceptDictionary> dictionaries,
                               const MatchResult& match, int target_class,
                               const LrpOptions& options = {});

// Sum of R_phi over pixels matched to `concept_index`.
double concept_relevance(const Grid& phi, std::span<const int> concept_of, int concept_index);

// Empirical q-quantile (linear interpolation between order statistics);
// absent for an empty list.
std::optional<double> concept_importance(std::span<const double> per_image, double q = 0.9);

struct ConservationReport {
  double target = 0.0;
  std::vector<LayerSum> sums;
  double drift = 0.0;    // max |sum + leakage_so_far - target| / |target|
  double leakage = 0.0;

  std::string to_text() const;
};

ConservationReport conservation_report(const RelevanceState& state);

}  // namespace volex
