#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "volex/camera.hpp"
#include "volex/image.hpp"
#include "volex/mesh.hpp"

namespace volex {

inline constexpr int kNoFace = -1;

// One face per pixel, sampled at pixel centres.
struct PixelFaceMap {
  int width = 0;
  int height = 0;
  std::vector<int> face;                        // kNoFace when uncovered
  std::vector<std::array<double, 3>> barycentric;  // weights of the face's vertices in order
  std::vector<double> depth;                    // camera-space depth, +inf when uncovered

  int at(int x, int y) const { return face[static_cast<std::size_t>(y) * width + x]; }
  int covered() const;
};

// Perspective projection with a depth buffer. Faces with a vertex at or
// behind the camera plane, back faces (clockwise as seen by the camera) and
// degenerate faces are culled. Edge pixels follow the top-left fill rule;
// equal depths keep the lower face index.
PixelFaceMap rasterize(const Mesh& mesh, const Camera& camera);

struct FaceAttribution {
  std::vector<double> faces;  // per-face mass
  double uncovered = 0.0;     // mass that hit no face

  double total() const;
};

// Adds each pixel's value to the face it sees; the rest is uncovered mass.
FaceAttribution project_attribution(const Grid& attribution, const PixelFaceMap& pfm,
                                    std::size_t face_count);

// Bilinear resampling (pixel-centre aligned) rescaled so the total mass is
// unchanged.
Grid resize_mass_preserving(const Grid& src, int width, int height);

// Per-pixel value of the pixel's face, min-max normalised to [0,1] over the
// canvas. An all-zero attribution renders as an all-zero image.
Grid render_face_attribution(const FaceAttribution& attribution, const PixelFaceMap& pfm);

// Element-wise sum followed by min-max normalisation of the face values.
// `uncovered` carries the summed uncovered mass before normalisation.
FaceAttribution aggregate_face_attributions(std::span<const FaceAttribution> items);

// "CAVT" vector of face masses plus a manifest with the uncovered mass.
void save_face_attribution(const FaceAttribution& fa, const std::filesystem::path& manifest,
                           const std::vector<std::pair<std::string, std::string>>& extra = {});
FaceAttribution load_face_attribution(const std::filesystem::path& manifest);

}  // namespace volex
