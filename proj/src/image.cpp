#include "volex/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "volex/error.hpp"
#include "volex/tensor.hpp"

namespace volex {

Grid::Grid(int w, int h, double fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
  if (w < 0 || h < 0) throw Error(ErrorCode::kInvalidArgument, "negative grid size");
}

double Grid::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

Grid PartMask::indicator(int label) const {
  Grid g(width, height);
  for (std::size_t i = 0; i < labels.size(); ++i) g.values[i] = labels[i] == label ? 1.0 : 0.0;
  return g;
}

Grid PartMask::foreground() const {
  Grid g(width, height);
  for (std::size_t i = 0; i < labels.size(); ++i) g.values[i] = labels[i] != 0 ? 1.0 : 0.0;
  return g;
}

Colormap colormap_from_name(std::string_view name) {
  if (name == "gray") return Colormap::kGray;
  if (name == "heat") return Colormap::kHeat;
  throw Error(ErrorCode::kInvalidArgument, "unknown colormap '" + std::string(name) + "'");
}

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

// kHeat: black -> red -> yellow -> white, piecewise linear in thirds.
std::array<std::uint8_t, 3> colormap_rgb(Colormap map, double v) {
  switch (map) {
    case Colormap::kGray: {
      const auto g = quantize(v);
      return {g, g, g};
    }
    case Colormap::kHeat: {
      const double t = std::clamp(v, 0.0, 1.0) * 3.0;
      return {quantize(t), quantize(t - 1.0), quantize(t - 2.0)};
    }
  }
  return {0, 0, 0};
}

void write_heatmap(const Grid& image, Colormap map, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty heatmap");
  }
  for (double v : image.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, "heatmap value outside [0,1]");
    }
  }
  std::string header = "P6\n" + std::to_string(image.width) + " " +
                       std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + image.size() * 3);
  for (double v : image.values) {
    const auto rgb = colormap_rgb(map, v);
    bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  }
  write_file_bytes(path, bytes);
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
  return tok;
}

int parse_header_int(const std::string& tok) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "bad graymap header field '" + tok + "'");
  }
}

}  // namespace

PartMask read_part_mask(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw Error(ErrorCode::kBadMagic, "bad magic");
  PartMask mask;
  mask.width = parse_header_int(next_token(bytes, pos));
  mask.height = parse_header_int(next_token(bytes, pos));
  const int maxval = parse_header_int(next_token(bytes, pos));
  if (maxval > 65535) throw Error(ErrorCode::kParse, "graymap maxval too large");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(mask.width) * mask.height;
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  if (pos > bytes.size() || bytes.size() - pos < n * bpp) {
    throw Error(ErrorCode::kTruncated, "truncated payload");
  }
  mask.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    mask.labels[i] = bpp == 1 ? bytes[pos + i]
                              : (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1];
  }
  return mask;
}

void write_part_mask(const PartMask& mask, const std::filesystem::path& path) {
  if (mask.labels.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw Error(ErrorCode::kShapeMismatch, "mask size does not match labels");
  }
  const int maxv = mask.labels.empty() ? 0 : *std::max_element(mask.labels.begin(), mask.labels.end());
  const int minv = mask.labels.empty() ? 0 : *std::min_element(mask.labels.begin(), mask.labels.end());
  if (minv < 0 || maxv > 65535) throw Error(ErrorCode::kOutOfRange, "label outside [0,65535]");
  const int maxval = maxv < 256 ? 255 : 65535;
  std::string header = "P5\n" + std::to_string(mask.width) + " " +
                       std::to_string(mask.height) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (int v : mask.labels) {
    if (maxval == 255) {
      bytes.push_back(static_cast<std::uint8_t>(v));
    } else {
      bytes.push_back(static_cast<std::uint8_t>(v >> 8));
      bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
  }
  write_file_bytes(path, bytes);
}

}  // namespace volex
