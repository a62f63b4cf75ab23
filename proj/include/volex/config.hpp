#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "volex/camera.hpp"
#include "volex/concepts.hpp"
#include "volex/keyvalue.hpp"
#include "volex/relevance.hpp"

namespace volex {

inline constexpr const char* kSeedEnvironmentVariable = "VOLEX_SEED";

// Every tunable of a run. Serialised verbatim into each output artifact.
struct RunConfig {
  std::uint64_t seed = 42;
  int concepts = kDefaultConceptCount;
  ExtractionMethod method = ExtractionMethod::kKMeans;
  int kmeans_restarts = 1;
  double visibility_threshold = kDefaultVisibilityThreshold;
  double epsilon = kDefaultEpsilon;
  double tau = 50.0;
  double quantile = 0.9;
  double temperature = 0.07;
  bool normalize = true;
  SeedMode seed_mode = SeedMode::kScore;
  int canvas_width = 800;
  int canvas_height = 640;
  double base_focal = kDefaultBaseFocal;
  int feature_stride = 8;
  double view_distance = 15.0;
  double view_azimuth_deg = -40.0;
  double view_elevation_deg = 30.0;
  int merges = 2;

  // Throws kOutOfRange for values outside their documented ranges.
  void validate() const;

  Canvas canvas() const { return {canvas_width, canvas_height}; }
  Canvas feature_canvas() const { return {canvas_width / feature_stride, canvas_height / feature_stride}; }
  MatchOptions match_options() const;
  LrpOptions lrp_options() const;
  Pose view_pose() const;

  // `key value` records; apply() accepts the same keys (unknown keys are an error).
  KeyValueFile to_keyvalue() const;
  void apply(const std::string& key, const std::string& value);
  void apply(const KeyValueFile& kv);
};

// Defaults, then VOLEX_SEED from the environment, then the optional file.
RunConfig load_run_config(const std::filesystem::path& file = {});

}  // namespace volex
