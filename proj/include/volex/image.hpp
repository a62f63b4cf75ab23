#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace volex {

// Scalar H×W raster, row-major (index = y * width + x).
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
  double sum() const;
};

// Per-pixel integer labels, 0 = background.
struct PartMask {
  int width = 0;
  int height = 0;
  std::vector<int> labels;

  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  // Indicator grid of pixels carrying `label`.
  Grid indicator(int label) const;
  // Indicator grid of all non-background pixels.
  Grid foreground() const;
};

enum class Colormap { kGray, kHeat };

Colormap colormap_from_name(std::string_view name);
std::array<std::uint8_t, 3> colormap_rgb(Colormap map, double v);

// Binary P6 output. Every value must lie in [0,1]; nothing is written otherwise.
void write_heatmap(const Grid& image, Colormap map, const std::filesystem::path& path);

// Binary P5 graymaps. 8-bit when maxval < 256, otherwise 16-bit big-endian.
PartMask read_part_mask(const std::filesystem::path& path);
void write_part_mask(const PartMask& mask, const std::filesystem::path& path);

}  // namespace volex
