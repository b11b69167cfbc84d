#include "gc4d/camera.hpp"

#include "gc4d/error.hpp"

#include <cmath>
#include <numbers>

namespace gc4d {

namespace {

constexpr double kBehindEps = 1e-9;

void check_fov(double fov, const char* which) {
  if (!(fov > 0.0 && fov < std::numbers::pi)) {
    throw Error(ErrorCode::FovOutOfRange,
                std::string(which) + " field of view must lie in (0, pi), got " +
                    std::to_string(fov));
  }
}

}  // namespace

SE3 CameraParams::world_to_camera() const { return SE3{rotation(), t}; }

SE3 CameraParams::camera_to_world() const { return se3_invert(world_to_camera()); }

Vec3 CameraParams::center() const { return -(rotation().transpose() * t); }

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v ? 1 : 0;
  return n;
}

std::size_t PointMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v ? 1 : 0;
  return n;
}

CameraParams camera_decode(const CameraVector& g) {
  const Eigen::Vector4d q(g[0], g[1], g[2], g[3]);
  const double norm = q.norm();
  if (!(norm >= 1e-12)) {
    throw Error(ErrorCode::ZeroQuaternion, "camera quaternion has (near) zero norm");
  }
  check_fov(g[7], "vertical");
  check_fov(g[8], "horizontal");
  CameraParams c;
  c.q = Eigen::Quaterniond(g[0] / norm, g[1] / norm, g[2] / norm, g[3] / norm);
  c.t = Vec3(g[4], g[5], g[6]);
  c.fov_v = g[7];
  c.fov_h = g[8];
  return c;
}

void validate_camera(const CameraParams& c) {
  if (std::abs(c.q.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "camera quaternion is not unit length");
  }
  check_fov(c.fov_v, "vertical");
  check_fov(c.fov_h, "horizontal");
}

CameraVector camera_encode(const CameraParams& c) {
  std::array<double, 4> q{c.q.w(), c.q.x(), c.q.y(), c.q.z()};
  double sign = 1.0;
  for (double x : q) {
    if (x != 0.0) {
      sign = x > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return {sign * q[0], sign * q[1], sign * q[2], sign * q[3],
          c.t.x(),     c.t.y(),     c.t.z(),     c.fov_v, c.fov_h};
}

Intrinsics intrinsics(const CameraParams& c, int height, int width) {
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  return Intrinsics{(w / 2.0) / std::tan(c.fov_h / 2.0), (h / 2.0) / std::tan(c.fov_v / 2.0),
                    w / 2.0, h / 2.0};
}

Vec3 pixel_ray_camera(const Intrinsics& k, double u, double v) {
  return Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
}

PointMap unproject(const DepthMap& d, const CameraParams& c) {
  const int H = d.height();
  const int W = d.width();
  const Intrinsics k = intrinsics(c, H, W);
  const SE3 to_world = c.camera_to_world();
  PointMap out(H, W);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      if (!d.valid(v, u)) continue;
      const double z = d.depth(v, u);
      const Vec3 ray = pixel_ray_camera(k, u + 0.5, v + 0.5);
      out.points(v, u) = se3_apply(to_world, ray * z);
      out.valid(v, u) = 1;
    }
  }
  return out;
}

std::optional<Projection> project(const Vec3& p, const CameraParams& c, int height, int width) {
  const Vec3 pc = se3_apply(c.world_to_camera(), p);
  if (pc.z() <= kBehindEps) return std::nullopt;
  const Intrinsics k = intrinsics(c, height, width);
  return Projection{k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy, pc.z()};
}

}  // namespace gc4d
