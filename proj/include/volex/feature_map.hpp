#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "volex/tensor.hpp"

namespace volex {

// H×W×C grid, channel-fastest (index = (y * W + x) * C + c). Pixel i in
// raster order owns values[i*C, (i+1)*C). Also used for backbone activations.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;
  // Set by normalize_features: pixels whose vector was zero and stayed zero.
  std::vector<std::uint8_t> zero_pixel;
  bool unit_norm = false;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c, double fill = 0.0);

  int pixels() const { return height * width; }
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return values[index(y, x, c)]; }
  double at(int y, int x, int c) const { return values[index(y, x, c)]; }

  std::span<double> pixel(int i) {
    return {values.data() + static_cast<std::size_t>(i) * channels, static_cast<std::size_t>(channels)};
  }
  std::span<const double> pixel(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * channels, static_cast<std::size_t>(channels)};
  }

  double sum() const;
};

// Rank-3 tensor (H, W, C) <-> feature map.
FeatureMap feature_map_from_tensor(const Tensor& t);
Tensor feature_map_to_tensor(const FeatureMap& f);

// Scales every pixel vector to unit L2 norm. Zero vectors stay zero and are
// flagged in zero_pixel.
FeatureMap normalize_features(const FeatureMap& f);

}  // namespace volex
