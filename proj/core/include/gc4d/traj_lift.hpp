#pragma once

#include "gc4d/camera.hpp"
#include "gc4d/raycast.hpp"
#include "gc4d/scene.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gc4d {

/// Frame indices where a new clip begins; strictly increasing, each in (0, N).
struct ClipBoundary {
  std::vector<int> split_indices;

  bool operator==(const ClipBoundary&) const = default;
};

inline constexpr double kDefaultClipTau = 0.7;
inline constexpr double kAttachDepthTolerance = 1e-3;

/// Casts the ray of a valid depth pixel against `meshes` and binds it to the
/// nearest face. Returns nullopt when the hit depth disagrees with the depth
/// map by more than 1e-3 m (the pixel belongs to no supplied mesh).
std::optional<SurfaceAttachment> attach_pixel(Pixel px, const DepthMap& depth,
                                              const CameraParams& camera,
                                              std::span<const MeshView> meshes);

/// b0 v0 + b1 v1 + b2 v2 on the attachment's face for the given vertices.
Vec3 barycentric_point(const SurfaceAttachment& att, std::span<const Vec3> vertices,
                       std::span<const Face> faces);

/// Re-evaluates the attachment on every frame's vertices of the same face.
/// Degenerate (zero-area) faces are evaluated as-is.
std::vector<Vec3> lift_trajectory(const SurfaceAttachment& att, const MeshSequence& seq);

/// Median |ln(D_{t+1}/D_t)| over pixels valid in both maps with depth >= 1e-6.
/// Empty when the pair shares no such pixel.
std::optional<double> depth_shift(const DepthMap& current, const DepthMap& next);

/// Splits before frame t+1 when depth_shift(t, t+1) > tau or the pair has no
/// valid overlap.
ClipBoundary split_clips(std::span<const DepthMap> depths, double tau = kDefaultClipTau);

/// Dynamic iff max_t |P_t - P_target| > delta (strict).
bool classify_dynamic(std::span<const Vec3> trajectory, int target, double delta);

}  // namespace gc4d
