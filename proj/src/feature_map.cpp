#include "volex/feature_map.hpp"

#include <cmath>
#include <numeric>

#include "volex/error.hpp"

namespace volex {

FeatureMap::FeatureMap(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      values(static_cast<std::size_t>(h) * w * c, fill) {
  if (h < 0 || w < 0 || c < 0) throw Error(ErrorCode::kInvalidArgument, "negative feature map extent");
}

double FeatureMap::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

FeatureMap feature_map_from_tensor(const Tensor& t) {
  if (t.rank() != 3) throw Error(ErrorCode::kShapeMismatch, "feature map tensor must be H×W×C");
  FeatureMap f(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]));
  for (std::size_t i = 0; i < t.data.size(); ++i) f.values[i] = t.data[i];
  return f;
}

Tensor feature_map_to_tensor(const FeatureMap& f) {
  std::vector<float> data(f.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(f.values[i]);
  return Tensor({static_cast<std::uint32_t>(f.height), static_cast<std::uint32_t>(f.width),
                 static_cast<std::uint32_t>(f.channels)},
                std::move(data));
}

FeatureMap normalize_features(const FeatureMap& f) {
  FeatureMap out = f;
  out.zero_pixel.assign(static_cast<std::size_t>(f.pixels()), 0);
  for (int i = 0; i < f.pixels(); ++i) {
    auto px = out.pixel(i);
    double sq = 0.0;
    for (double v : px) sq += v * v;
    if (sq == 0.0) {
      out.zero_pixel[i] = 1;
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : px) v *= inv;
  }
  out.unit_norm = true;
  return out;
}

}  // namespace volex
