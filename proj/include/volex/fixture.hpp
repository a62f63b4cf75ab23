#pragma once

#include <cstdint>
#include <filesystem>

#include "volex/config.hpp"

namespace volex {

struct FixtureOptions {
  std::uint64_t seed = 42;
  int classes = 3;
  int images_per_class = 10;
  int channels = 32;
  double feature_noise = 0.05;    // per-pixel noise on rendered object features
  double volume_noise = 0.1;      // spread of Gaussian features around the class mean
  double background_scale = 1.0;  // magnitude of background clutter features
  double occlusion = 0.4;         // fraction of 4×4 feature tiles zeroed in the occluded copy
  int training_views = 24;        // synthetic views used to measure visibility
};

// Writes a synthetic dataset: one ellipsoid volume per class with separable
// random features, rendered feature maps under random poses (plus an
// occluded copy), object and part masks, and `manifest.txt`. Throws
// kInvalidArgument for fewer than two classes. Returns the manifest path.
std::filesystem::path generate_fixture(const FixtureOptions& options, const RunConfig& config,
                                       const std::filesystem::path& out_dir);

// FNV-1a over sorted relative paths and file bytes of every regular file.
std::uint64_t tree_checksum(const std::filesystem::path& dir);

}  // namespace volex
