#include "gc4d/traj_lift.hpp"

#include "gc4d/error.hpp"
#include "gc4d/stats.hpp"

#include <cmath>

namespace gc4d {

namespace {

constexpr double kMinDepth = 1e-6;

}  // namespace

std::optional<SurfaceAttachment> attach_pixel(Pixel px, const DepthMap& depth,
                                              const CameraParams& camera,
                                              std::span<const MeshView> meshes) {
  if (px.u < 0 || px.v < 0 || px.u >= depth.width() || px.v >= depth.height()) {
    throw Error(ErrorCode::InvalidArgument, "attach_pixel: pixel outside the depth map");
  }
  if (!depth.valid(px.v, px.u)) {
    throw Error(ErrorCode::InvalidArgument, "attach_pixel: pixel is not valid in the depth map");
  }
  const Intrinsics k = intrinsics(camera, depth.height(), depth.width());
  const Vec3 ray_cam = pixel_ray_camera(k, px.u + 0.5, px.v + 0.5);
  const Mat3 Rt = camera.rotation().transpose();
  const Vec3 origin = camera.center();
  const Vec3 direction = Rt * ray_cam;

  // With a camera-frame ray of unit z, the ray parameter is the z-depth.
  const auto hit = nearest_hit(origin, direction, meshes);
  if (!hit) return std::nullopt;
  if (std::abs(hit->t - depth.depth(px.v, px.u)) > kAttachDepthTolerance) return std::nullopt;
  return SurfaceAttachment{hit->object_id, hit->face_id, hit->bary};
}

Vec3 barycentric_point(const SurfaceAttachment& att, std::span<const Vec3> vertices,
                       std::span<const Face> faces) {
  if (att.face_id < 0 || static_cast<std::size_t>(att.face_id) >= faces.size()) {
    throw Error(ErrorCode::FaceOutOfRange,
                "face id " + std::to_string(att.face_id) + " out of range");
  }
  const Face& f = faces[static_cast<std::size_t>(att.face_id)];
  return att.bary[0] * vertices[static_cast<std::size_t>(f[0])] +
         att.bary[1] * vertices[static_cast<std::size_t>(f[1])] +
         att.bary[2] * vertices[static_cast<std::size_t>(f[2])];
}

std::vector<Vec3> lift_trajectory(const SurfaceAttachment& att, const MeshSequence& seq) {
  if (att.face_id < 0 || static_cast<std::size_t>(att.face_id) >= seq.faces.size()) {
    throw Error(ErrorCode::FaceOutOfRange,
                "face id " + std::to_string(att.face_id) + " out of range");
  }
  std::vector<Vec3> out;
  out.reserve(seq.vertices.size());
  for (const auto& frame_vertices : seq.vertices) {
    out.push_back(barycentric_point(att, frame_vertices, seq.faces));
  }
  return out;
}

std::optional<double> depth_shift(const DepthMap& current, const DepthMap& next) {
  if (current.height() != next.height() || current.width() != next.width()) {
    throw Error(ErrorCode::ShapeMismatch, "depth_shift: depth maps differ in size");
  }
  std::vector<double> log_ratios;
  log_ratios.reserve(current.depth.size());
  for (std::size_t i = 0; i < current.depth.size(); ++i) {
    if (!current.valid[i] || !next.valid[i]) continue;
    const double d0 = current.depth[i];
    const double d1 = next.depth[i];
    if (!(d0 >= kMinDepth) || !(d1 >= kMinDepth)) continue;
    log_ratios.push_back(std::abs(std::log(d1 / d0)));
  }
  if (log_ratios.empty()) return std::nullopt;
  return median(log_ratios);
}

ClipBoundary split_clips(std::span<const DepthMap> depths, double tau) {
  if (depths.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "split_clips needs at least two frames");
  }
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "split_clips: tau must be > 0");
  ClipBoundary out;
  for (std::size_t t = 0; t + 1 < depths.size(); ++t) {
    const auto shift = depth_shift(depths[t], depths[t + 1]);
    // No shared valid pixel counts as a cut.
    if (!shift || *shift > tau) out.split_indices.push_back(static_cast<int>(t + 1));
  }
  return out;
}

bool classify_dynamic(std::span<const Vec3> trajectory, int target, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dynamic threshold must be > 0");
  if (target < 0 || static_cast<std::size_t>(target) >= trajectory.size()) {
    throw Error(ErrorCode::TargetOutOfRange, "classify_dynamic: target frame out of range");
  }
  const Vec3& anchor = trajectory[static_cast<std::size_t>(target)];
  for (const auto& p : trajectory) {
    if ((p - anchor).norm() > delta) return true;
  }
  return false;
}

}  // namespace gc4d
