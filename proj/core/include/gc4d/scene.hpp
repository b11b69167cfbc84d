#pragma once

#include "gc4d/camera.hpp"
#include "gc4d/grid.hpp"
#include "gc4d/raycast.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gc4d {

/// Object id used for the static background in attachments.
inline constexpr int kBackgroundId = -1;

/// Per-frame vertex positions over a fixed face list. Vertex k at frame t
/// corresponds to vertex k at every other frame.
struct MeshSequence {
  std::vector<std::vector<Vec3>> vertices;  // [frame][vertex]
  std::vector<Face> faces;

  int n_frames() const noexcept { return static_cast<int>(vertices.size()); }
  void validate() const;
};

/// Binds a surface location to (object, face, barycentric weights).
struct SurfaceAttachment {
  int object_id = kBackgroundId;
  int face_id = 0;
  Vec3 bary = Vec3::Zero();

  bool operator==(const SurfaceAttachment&) const = default;
};

using AttachmentMap = Grid<std::optional<SurfaceAttachment>>;

/// A scene object. Rigid objects keep their per-frame poses (frame-t vertices
/// are motion[t] applied to the rest mesh); deforming objects only carry the
/// vertex sequence.
struct SceneObject {
  std::string name;
  MeshSequence mesh;
  std::optional<std::vector<SE3>> motion;

  bool is_rigid() const noexcept { return motion.has_value(); }
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  TriangleMesh background;
  std::vector<CameraParams> cameras;  // one per frame
  int height = 64;
  int width = 64;
  int n_frames = 1;
  std::uint64_t seed = 0;
  int n_queries = 512;
  double dynamic_delta = 0.03;

  void validate() const;
};

struct Pixel {
  int u = 0;
  int v = 0;

  bool operator==(const Pixel&) const = default;
};

/// Track-major positions: track m at frame t lives at index m * n_frames + t.
struct TrajectorySet {
  int n_tracks = 0;
  int n_frames = 0;
  std::vector<Vec3> positions;
  std::vector<unsigned char> visible;
  std::vector<unsigned char> dynamic;
  std::vector<Pixel> queries;  // frame-0 query pixel per track (optional)

  TrajectorySet() = default;
  TrajectorySet(int tracks, int frames);

  std::size_t index(int track, int frame) const noexcept {
    return static_cast<std::size_t>(track) * static_cast<std::size_t>(n_frames) +
           static_cast<std::size_t>(frame);
  }
  Vec3& position(int track, int frame) noexcept { return positions[index(track, frame)]; }
  const Vec3& position(int track, int frame) const noexcept {
    return positions[index(track, frame)];
  }
  std::span<const Vec3> track(int m) const noexcept {
    return std::span<const Vec3>(positions).subspan(index(m, 0),
                                                    static_cast<std::size_t>(n_frames));
  }
  void validate() const;
};

struct SequenceDataset {
  int n_frames = 0;
  int height = 0;
  int width = 0;
  std::vector<DepthMap> depths;
  std::vector<CameraParams> cameras;
  std::vector<PointMap> pointmaps;
  std::vector<AttachmentMap> attachments;
  TrajectorySet trajectories;
  std::vector<Mask> dynamic_masks;
};

struct RenderedFrame {
  DepthMap depth;
  AttachmentMap attachments;
};

// Primitives. Boxes and quads are triangulated here.
TriangleMesh make_box(const Vec3& center, const Vec3& half_extents);
/// Rectangle centered at `center` spanned by ±axis_u and ±axis_v.
TriangleMesh make_quad(const Vec3& center, const Vec3& axis_u, const Vec3& axis_v);
void append_mesh(TriangleMesh& dst, const TriangleMesh& src);

SceneObject make_rigid_object(std::string name, const TriangleMesh& rest,
                              std::vector<SE3> poses);
SceneObject make_deforming_object(std::string name, MeshSequence mesh);

/// Pose at frame t for constant per-frame velocities: rotation exp(t ω) about
/// `pivot`, then translation t·v.
SE3 constant_velocity_pose(const Vec3& pivot, const Vec3& velocity, const Vec3& angular_velocity,
                           int frame);

/// Every mesh in the scene at frame t; background last.
std::vector<MeshView> frame_meshes(const SceneSpec& spec, int frame);

/// World position of an attachment at frame t.
Vec3 surface_point(const SceneSpec& spec, const SurfaceAttachment& att, int frame);

/// True when the world point is inside the image of camera t and no surface
/// lies more than 1e-4 m (camera z) in front of it along its viewing ray.
bool point_visible(const SceneSpec& spec, int frame, const Vec3& p);

RenderedFrame render_frame(const SceneSpec& spec, int frame);

SequenceDataset generate(const SceneSpec& spec);

/// Moves the valid points of a frame observed with `attachments` from time
/// `from` to time `to`. Background points are unchanged; rigid object points
/// get T(to) T(from)^-1; deforming object points are re-evaluated on the
/// frame-`to` mesh.
PointMap warp_points(const SceneSpec& spec, const AttachmentMap& attachments,
                     const PointMap& points, int from, int to);

/// Ground-truth P_i^a: frame i's points expressed at time a.
PointMap oracle_aggregate(const SceneSpec& spec, const SequenceDataset& data, int source,
                          int target);

/// Union of every valid point, frame-major then row-major.
PointCloud complete_cloud(std::span<const PointMap> maps);

/// maps_by_target[a] must hold P_0^a. Track m at time a is P_0^a at its query.
TrajectorySet tracks_from_aggregation(std::span<const PointMap> maps_by_target,
                                      std::span<const Pixel> queries, double dynamic_delta);

/// Flat-shaded pseudo image (per-object hue times inverse depth) for feeding
/// the token model from generated scenes.
Grid<Vec3> pseudo_image(const DepthMap& depth, const AttachmentMap& attachments);

}  // namespace gc4d
