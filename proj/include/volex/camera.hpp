#pragma once

#include <Eigen/Core>

#include "volex/mesh.hpp"

namespace volex {

// Spherical camera parameters, angles in radians. The camera sits at
// distance * (cos(el) sin(az), sin(el), cos(el) cos(az)) in a y-up world and
// looks at the origin; theta rolls it about the viewing axis.
struct Pose {
  double azimuth = 0.0;
  double elevation = 0.0;
  double theta = 0.0;
  double distance = 15.0;
};

struct Canvas {
  int width = 800;
  int height = 640;
};

// Focal length in pixels at the reference canvas; other canvases scale it by
// width/800 and height/640, which keeps the field of view fixed.
inline constexpr double kDefaultBaseFocal = 3000.0;
inline constexpr Canvas kReferenceCanvas{800, 640};

// Class-level visualisation view: radius 15, elevation 30 deg, azimuth -40 deg.
Pose default_view_pose();

double degrees(double radians);
double radians(double degrees);

struct Camera {
  Vec3 position;
  Vec3 right;
  Vec3 up;
  Vec3 forward;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Camera frame: x right, y up, z along the viewing direction (depth).
  Vec3 to_camera(const Vec3& world) const;
  // Continuous pixel coordinates, u to the right and v downwards; pixel
  // (x, y) has its centre at (x + 0.5, y + 0.5).
  Eigen::Vector2d project(const Vec3& world) const;
};

Camera camera_from_pose(const Pose& pose, Canvas canvas = {}, double base_focal = kDefaultBaseFocal);

// CAD (z-up) to camera convention (y-up): (x, y, z) -> (x, z, -y).
Mesh cad_to_camera_axes(const Mesh& mesh);

}  // namespace volex
