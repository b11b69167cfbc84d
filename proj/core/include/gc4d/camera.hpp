#pragma once

#include "gc4d/geometry.hpp"
#include "gc4d/grid.hpp"

#include <array>
#include <optional>
#include <span>

namespace gc4d {

/// Flat camera encoding: [qw, qx, qy, qz, tx, ty, tz, fov_v, fov_h].
using CameraVector = std::array<double, 9>;

/// Pinhole camera with world-to-camera extrinsics (p_cam = R(q) p_world + t)
/// and a principal point fixed at the image center.
struct CameraParams {
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vec3 t = Vec3::Zero();
  double fov_v = 1.5707963267948966;
  double fov_h = 1.5707963267948966;

  Mat3 rotation() const { return q.toRotationMatrix(); }
  SE3 world_to_camera() const;
  SE3 camera_to_world() const;
  /// Camera center in world coordinates, -Rᵀ t.
  Vec3 center() const;
};

struct Intrinsics {
  double fx, fy, cx, cy;
};

/// Pixel-continuous projection: pixel (u, v) has its center at (u + 0.5, v + 0.5).
struct Projection {
  double u, v, z;
};

struct DepthMap {
  Grid<double> depth;  // camera-frame z, meters
  Mask valid;

  DepthMap() = default;
  DepthMap(int height, int width) : depth(height, width, 0.0), valid(height, width, 0) {}

  int height() const noexcept { return depth.height(); }
  int width() const noexcept { return depth.width(); }
  std::size_t valid_count() const;
};

struct PointMap {
  Grid<Vec3> points;  // world frame, meters
  Mask valid;

  PointMap() = default;
  PointMap(int height, int width)
      : points(height, width, Vec3::Zero()), valid(height, width, 0) {}

  int height() const noexcept { return points.height(); }
  int width() const noexcept { return points.width(); }
  std::size_t valid_count() const;
};

/// Throws ZeroQuaternion / FovOutOfRange.
CameraParams camera_decode(const CameraVector& g);
/// Canonical sign: w >= 0, ties broken by the first nonzero component positive.
CameraVector camera_encode(const CameraParams& c);
/// Validates the CameraParams invariants; throws on violation.
void validate_camera(const CameraParams& c);

Intrinsics intrinsics(const CameraParams& c, int height, int width);

/// Camera-frame ray direction through a continuous pixel location, z = 1.
Vec3 pixel_ray_camera(const Intrinsics& k, double u, double v);

PointMap unproject(const DepthMap& d, const CameraParams& c);

/// Empty optional means the point is behind the camera (z <= 1e-9).
std::optional<Projection> project(const Vec3& p, const CameraParams& c, int height, int width);

}  // namespace gc4d
