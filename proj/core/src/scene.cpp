#include "gc4d/scene.hpp"

#include "gc4d/error.hpp"
#include "gc4d/random.hpp"
#include "gc4d/traj_lift.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace gc4d {

namespace {

void check_faces(const std::vector<Face>& faces, std::size_t n_vertices, const std::string& what) {
  for (const auto& f : faces) {
    for (int k : f) {
      if (k < 0 || static_cast<std::size_t>(k) >= n_vertices) {
        throw Error(ErrorCode::InvalidArgument, what + ": face index out of range");
      }
    }
  }
}

void check_frame(const SceneSpec& spec, int frame) {
  if (frame < 0 || frame >= spec.n_frames) {
    throw Error(ErrorCode::InvalidArgument, "frame index " + std::to_string(frame) +
                                                " out of range [0, " +
                                                std::to_string(spec.n_frames) + ")");
  }
}

}  // namespace

void MeshSequence::validate() const {
  if (vertices.empty() || vertices.front().empty() || faces.empty()) {
    throw Error(ErrorCode::InvalidArgument, "mesh sequence needs at least one vertex and face");
  }
  const std::size_t V = vertices.front().size();
  for (const auto& frame : vertices) {
    if (frame.size() != V) {
      throw Error(ErrorCode::InvalidArgument, "mesh sequence vertex count varies across frames");
    }
  }
  check_faces(faces, V, "mesh sequence");
}

void SceneSpec::validate() const {
  if (n_frames < 1) throw Error(ErrorCode::InvalidArgument, "scene needs at least one frame");
  if (height < 1 || width < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 1");
  if (static_cast<int>(cameras.size()) != n_frames) {
    throw Error(ErrorCode::InvalidArgument, "scene needs one camera per frame");
  }
  for (const auto& c : cameras) validate_camera(c);
  if (n_queries < 0) throw Error(ErrorCode::InvalidArgument, "n_queries must be >= 0");
  if (!(dynamic_delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dynamic_delta must be > 0");
  check_faces(background.faces, background.vertices.size(), "background");
  for (const auto& obj : objects) {
    obj.mesh.validate();
    if (obj.mesh.n_frames() != n_frames) {
      throw Error(ErrorCode::InvalidArgument,
                  "object '" + obj.name + "' does not have one vertex set per frame");
    }
    if (obj.motion && static_cast<int>(obj.motion->size()) != n_frames) {
      throw Error(ErrorCode::InvalidArgument,
                  "object '" + obj.name + "' does not have one pose per frame");
    }
  }
}

TrajectorySet::TrajectorySet(int tracks, int frames)
    : n_tracks(tracks),
      n_frames(frames),
      positions(static_cast<std::size_t>(tracks) * static_cast<std::size_t>(frames),
                Vec3::Zero()),
      visible(static_cast<std::size_t>(tracks) * static_cast<std::size_t>(frames), 0),
      dynamic(static_cast<std::size_t>(tracks), 0) {}

void TrajectorySet::validate() const {
  const std::size_t n = static_cast<std::size_t>(n_tracks) * static_cast<std::size_t>(n_frames);
  if (positions.size() != n || visible.size() != n ||
      dynamic.size() != static_cast<std::size_t>(n_tracks) ||
      (!queries.empty() && queries.size() != static_cast<std::size_t>(n_tracks))) {
    throw Error(ErrorCode::ShapeMismatch, "trajectory set arrays disagree with its dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (visible[i] && !positions[i].allFinite()) {
      throw Error(ErrorCode::MalformedInput, "visible trajectory sample is not finite");
    }
  }
}

TriangleMesh make_box(const Vec3& center, const Vec3& half_extents) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    const Vec3 s((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
    m.vertices.push_back(center + s.cwiseProduct(half_extents));
  }
  // Two triangles per side: -x, +x, -y, +y, -z, +z.
  m.faces = {{0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}, {0, 1, 5}, {0, 5, 4},
             {2, 6, 7}, {2, 7, 3}, {0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}};
  return m;
}

TriangleMesh make_quad(const Vec3& center, const Vec3& axis_u, const Vec3& axis_v) {
  TriangleMesh m;
  m.vertices = {center - axis_u - axis_v, center + axis_u - axis_v, center + axis_u + axis_v,
                center - axis_u + axis_v};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

void append_mesh(TriangleMesh& dst, const TriangleMesh& src) {
  const int offset = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& f : src.faces) dst.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
}

SceneObject make_rigid_object(std::string name, const TriangleMesh& rest, std::vector<SE3> poses) {
  SceneObject obj;
  obj.name = std::move(name);
  obj.mesh.faces = rest.faces;
  obj.mesh.vertices.reserve(poses.size());
  for (const auto& pose : poses) {
    std::vector<Vec3> frame;
    frame.reserve(rest.vertices.size());
    for (const auto& v : rest.vertices) frame.push_back(se3_apply(pose, v));
    obj.mesh.vertices.push_back(std::move(frame));
  }
  obj.motion = std::move(poses);
  return obj;
}

SceneObject make_deforming_object(std::string name, MeshSequence mesh) {
  SceneObject obj;
  obj.name = std::move(name);
  obj.mesh = std::move(mesh);
  return obj;
}

SE3 constant_velocity_pose(const Vec3& pivot, const Vec3& velocity, const Vec3& angular_velocity,
                           int frame) {
  const double t = static_cast<double>(frame);
  const Mat3 R = rotation_from_axis_angle(angular_velocity * t);
  // p -> R (p - pivot) + pivot + t v
  return SE3{R, pivot - R * pivot + velocity * t};
}

std::vector<MeshView> frame_meshes(const SceneSpec& spec, int frame) {
  check_frame(spec, frame);
  std::vector<MeshView> views;
  views.reserve(spec.objects.size() + 1);
  for (std::size_t o = 0; o < spec.objects.size(); ++o) {
    const auto& mesh = spec.objects[o].mesh;
    views.push_back(make_mesh_view(static_cast<int>(o),
                                   mesh.vertices[static_cast<std::size_t>(frame)], mesh.faces));
  }
  if (!spec.background.faces.empty()) {
    views.push_back(make_mesh_view(kBackgroundId, spec.background.vertices, spec.background.faces));
  }
  return views;
}

Vec3 surface_point(const SceneSpec& spec, const SurfaceAttachment& att, int frame) {
  check_frame(spec, frame);
  if (att.object_id == kBackgroundId) {
    return barycentric_point(att, spec.background.vertices, spec.background.faces);
  }
  if (att.object_id < 0 || static_cast<std::size_t>(att.object_id) >= spec.objects.size()) {
    throw Error(ErrorCode::InvalidArgument, "attachment refers to unknown object");
  }
  const auto& mesh = spec.objects[static_cast<std::size_t>(att.object_id)].mesh;
  return barycentric_point(att, mesh.vertices[static_cast<std::size_t>(frame)], mesh.faces);
}

namespace {

constexpr double kVisibilityTolerance = 1e-4;

bool visible_against(const std::vector<MeshView>& meshes, const CameraParams& cam, int height,
                     int width, const Vec3& p) {
  const auto proj = project(p, cam, height, width);
  if (!proj) return false;
  if (proj->u < 0.0 || proj->v < 0.0 || proj->u >= width || proj->v >= height) return false;
  const Vec3 origin = cam.center();
  // Along origin + s (p - origin) the camera z is s * z_p.
  const auto hit = nearest_hit(origin, p - origin, meshes);
  if (!hit) return true;
  return proj->z - hit->t * proj->z <= kVisibilityTolerance;
}

std::vector<Vec3> trajectory_of(const SceneSpec& spec, const SurfaceAttachment& att) {
  std::vector<Vec3> traj;
  traj.reserve(static_cast<std::size_t>(spec.n_frames));
  for (int t = 0; t < spec.n_frames; ++t) traj.push_back(surface_point(spec, att, t));
  return traj;
}

}  // namespace

bool point_visible(const SceneSpec& spec, int frame, const Vec3& p) {
  const auto meshes = frame_meshes(spec, frame);
  return visible_against(meshes, spec.cameras[static_cast<std::size_t>(frame)], spec.height,
                         spec.width, p);
}

RenderedFrame render_frame(const SceneSpec& spec, int frame) {
  check_frame(spec, frame);
  const auto meshes = frame_meshes(spec, frame);
  const CameraParams& cam = spec.cameras[static_cast<std::size_t>(frame)];
  const Intrinsics k = intrinsics(cam, spec.height, spec.width);
  const Mat3 Rt = cam.rotation().transpose();
  const Vec3 origin = cam.center();

  RenderedFrame out{DepthMap(spec.height, spec.width),
                    AttachmentMap(spec.height, spec.width, std::nullopt)};
  for (int v = 0; v < spec.height; ++v) {
    for (int u = 0; u < spec.width; ++u) {
      const Vec3 dir = Rt * pixel_ray_camera(k, u + 0.5, v + 0.5);
      const auto hit = nearest_hit(origin, dir, meshes);
      if (!hit) continue;
      // Camera-frame ray has z = 1, so the ray parameter is the z-depth.
      out.depth.depth(v, u) = hit->t;
      out.depth.valid(v, u) = 1;
      out.attachments(v, u) = SurfaceAttachment{hit->object_id, hit->face_id, hit->bary};
    }
  }
  return out;
}

SequenceDataset generate(const SceneSpec& spec) {
  spec.validate();
  const int N = spec.n_frames;
  SequenceDataset data;
  data.n_frames = N;
  data.height = spec.height;
  data.width = spec.width;
  data.cameras = spec.cameras;

  std::size_t covered = 0;
  for (int t = 0; t < N; ++t) {
    auto frame = render_frame(spec, t);
    covered += frame.depth.valid_count();
    data.pointmaps.push_back(unproject(frame.depth, spec.cameras[static_cast<std::size_t>(t)]));
    data.depths.push_back(std::move(frame.depth));
    data.attachments.push_back(std::move(frame.attachments));
  }
  if (covered == 0) throw Error(ErrorCode::EmptyScene, "no pixel is covered in any frame");

  for (int t = 0; t < N; ++t) {
    const auto& atts = data.attachments[static_cast<std::size_t>(t)];
    Mask mask(spec.height, spec.width, 0);
    for (std::size_t i = 0; i < atts.size(); ++i) {
      if (!atts[i]) continue;
      mask[i] = classify_dynamic(trajectory_of(spec, *atts[i]), t, spec.dynamic_delta) ? 1 : 0;
    }
    data.dynamic_masks.push_back(std::move(mask));
  }

  // Query draw order: partial Fisher-Yates over frame-0 valid pixels listed
  // row-major; draw k picks index k + below(n - k).
  const auto& atts0 = data.attachments.front();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < atts0.size(); ++i) {
    if (atts0[i]) candidates.push_back(i);
  }
  const std::size_t M = std::min(candidates.size(), static_cast<std::size_t>(spec.n_queries));
  SplitMix64 rng(spec.seed);
  for (std::size_t k = 0; k < M; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
    std::swap(candidates[k], candidates[j]);
  }

  std::vector<std::vector<MeshView>> meshes_per_frame;
  for (int t = 0; t < N; ++t) meshes_per_frame.push_back(frame_meshes(spec, t));

  TrajectorySet& traj = data.trajectories;
  traj = TrajectorySet(static_cast<int>(M), N);
  traj.queries.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t pix = candidates[m];
    traj.queries[m] = Pixel{static_cast<int>(pix % static_cast<std::size_t>(spec.width)),
                            static_cast<int>(pix / static_cast<std::size_t>(spec.width))};
    const auto positions = trajectory_of(spec, *atts0[pix]);
    for (int t = 0; t < N; ++t) {
      const Vec3& p = positions[static_cast<std::size_t>(t)];
      traj.position(static_cast<int>(m), t) = p;
      traj.visible[traj.index(static_cast<int>(m), t)] =
          visible_against(meshes_per_frame[static_cast<std::size_t>(t)],
                          spec.cameras[static_cast<std::size_t>(t)], spec.height, spec.width, p)
              ? 1
              : 0;
    }
    traj.dynamic[m] = classify_dynamic(positions, 0, spec.dynamic_delta) ? 1 : 0;
  }
  return data;
}

PointMap warp_points(const SceneSpec& spec, const AttachmentMap& attachments,
                     const PointMap& points, int from, int to) {
  check_frame(spec, from);
  check_frame(spec, to);
  if (!attachments.same_shape(points.points)) {
    throw Error(ErrorCode::ShapeMismatch, "attachments and point map differ in size");
  }
  if (from == to) return points;

  std::vector<std::optional<SE3>> relative(spec.objects.size());
  for (std::size_t o = 0; o < spec.objects.size(); ++o) {
    const auto& motion = spec.objects[o].motion;
    if (!motion) continue;
    relative[o] = se3_compose((*motion)[static_cast<std::size_t>(to)],
                              se3_invert((*motion)[static_cast<std::size_t>(from)]));
  }

  PointMap out = points;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (!out.valid[i]) continue;
    const auto& att = attachments[i];
    if (!att) {
      throw Error(ErrorCode::MalformedInput, "valid pixel without a surface attachment");
    }
    if (att->object_id == kBackgroundId) continue;
    if (att->object_id < 0 || static_cast<std::size_t>(att->object_id) >= spec.objects.size()) {
      throw Error(ErrorCode::InvalidArgument, "attachment refers to unknown object");
    }
    const auto& rel = relative[static_cast<std::size_t>(att->object_id)];
    out.points[i] = rel ? se3_apply(*rel, out.points[i]) : surface_point(spec, *att, to);
  }
  return out;
}

PointMap oracle_aggregate(const SceneSpec& spec, const SequenceDataset& data, int source,
                          int target) {
  check_frame(spec, source);
  check_frame(spec, target);
  const auto s = static_cast<std::size_t>(source);
  return warp_points(spec, data.attachments[s], data.pointmaps[s], source, target);
}

PointCloud complete_cloud(std::span<const PointMap> maps) {
  PointCloud cloud;
  std::size_t n = 0;
  for (const auto& m : maps) n += m.valid_count();
  cloud.reserve(n);
  for (const auto& m : maps) {
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      if (m.valid[i]) cloud.push_back(m.points[i]);
    }
  }
  return cloud;
}

TrajectorySet tracks_from_aggregation(std::span<const PointMap> maps_by_target,
                                      std::span<const Pixel> queries, double dynamic_delta) {
  const int N = static_cast<int>(maps_by_target.size());
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "no aggregated maps supplied");
  TrajectorySet out(static_cast<int>(queries.size()), N);
  out.queries.assign(queries.begin(), queries.end());
  for (std::size_t m = 0; m < queries.size(); ++m) {
    const Pixel q = queries[m];
    for (int a = 0; a < N; ++a) {
      const auto& map = maps_by_target[static_cast<std::size_t>(a)];
      if (q.u < 0 || q.v < 0 || q.u >= map.width() || q.v >= map.height() || !map.valid(q.v, q.u)) {
        throw Error(ErrorCode::QueryInvalid, "query pixel (" + std::to_string(q.u) + ", " +
                                                 std::to_string(q.v) + ") is invalid in frame 0");
      }
      out.position(static_cast<int>(m), a) = map.points(q.v, q.u);
      out.visible[out.index(static_cast<int>(m), a)] = 1;
    }
    out.dynamic[m] = classify_dynamic(out.track(static_cast<int>(m)), 0, dynamic_delta) ? 1 : 0;
  }
  return out;
}

Grid<Vec3> pseudo_image(const DepthMap& depth, const AttachmentMap& attachments) {
  Grid<Vec3> img(depth.height(), depth.width(), Vec3::Zero());
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!depth.valid[i] || !attachments[i]) continue;
    const int id = attachments[i]->object_id;
    Vec3 color(0.5, 0.5, 0.5);
    if (id != kBackgroundId) {
      const double hue = std::fmod(0.618033988749895 * (id + 1), 1.0);
      color = Vec3(0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * hue), 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (hue + 1.0 / 3.0)),
                   0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (hue + 2.0 / 3.0)));
    }
    img[i] = color / (1.0 + depth.depth[i]);
  }
  return img;
}

}  // namespace gc4d
