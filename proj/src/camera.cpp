#include "volex/camera.hpp"

#include <cmath>
#include <numbers>

#include "volex/error.hpp"

namespace volex {

double degrees(double r) { return r * 180.0 / std::numbers::pi; }
double radians(double d) { return d * std::numbers::pi / 180.0; }

Pose default_view_pose() { return Pose{radians(-40.0), radians(30.0), 0.0, 15.0}; }

Vec3 Camera::to_camera(const Vec3& world) const {
  const Vec3 d = world - position;
  return Vec3(right.dot(d), up.dot(d), forward.dot(d));
}

Eigen::Vector2d Camera::project(const Vec3& world) const {
  const Vec3 c = to_camera(world);
  return Eigen::Vector2d(cx + fx * c.x() / c.z(), cy - fy * c.y() / c.z());
}

Camera camera_from_pose(const Pose& pose, Canvas canvas, double base_focal) {
  if (!(pose.distance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "pose distance must be positive");
  if (canvas.width <= 0 || canvas.height <= 0) throw Error(ErrorCode::kInvalidArgument, "empty canvas");
  if (!(base_focal > 0.0)) throw Error(ErrorCode::kInvalidArgument, "focal length must be positive");
  const double ce = std::cos(pose.elevation), se = std::sin(pose.elevation);
  const double ca = std::cos(pose.azimuth), sa = std::sin(pose.azimuth);
  Camera cam;
  cam.position = pose.distance * Vec3(ce * sa, se, ce * ca);
  cam.forward = -Vec3(ce * sa, se, ce * ca);
  // d(position)/d(azimuth) direction; stays defined at the poles.
  const Vec3 right0(ca, 0.0, -sa);
  const Vec3 up0 = right0.cross(cam.forward);
  const double ct = std::cos(pose.theta), st = std::sin(pose.theta);
  cam.right = (ct * right0 + st * up0).normalized();
  cam.up = (-st * right0 + ct * up0).normalized();
  cam.forward.normalize();
  cam.width = canvas.width;
  cam.height = canvas.height;
  cam.fx = base_focal * canvas.width / kReferenceCanvas.width;
  cam.fy = base_focal * canvas.height / kReferenceCanvas.height;
  cam.cx = 0.5 * canvas.width;
  cam.cy = 0.5 * canvas.height;
  return cam;
}

Mesh cad_to_camera_axes(const Mesh& mesh) {
  Mesh out = mesh;
  for (auto& v : out.vertices) v = Vec3(v.x(), v.z(), -v.y());
  return out;
}

}  // namespace volex
