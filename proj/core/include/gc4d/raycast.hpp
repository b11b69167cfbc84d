#pragma once

#include "gc4d/geometry.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace gc4d {

using Face = std::array<int, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
};

/// Ray parameter and barycentric weights (b0, b1, b2) of a ray/triangle hit:
/// origin + t * direction == b0 v0 + b1 v1 + b2 v2.
struct RayHit {
  double t;
  Vec3 bary;
};

/// Möller–Trumbore intersection. Both triangle orientations are accepted;
/// hits with t <= 1e-9 and rays parallel to the triangle plane miss.
std::optional<RayHit> raycast(const Vec3& origin, const Vec3& direction, const Vec3& v0,
                              const Vec3& v1, const Vec3& v2);

/// Non-owning view of one mesh at one frame, tagged with its object id.
struct MeshView {
  int object_id = 0;
  std::span<const Vec3> vertices;
  std::span<const Face> faces;
  Eigen::AlignedBox3d bounds;
};

MeshView make_mesh_view(int object_id, std::span<const Vec3> vertices,
                        std::span<const Face> faces);

struct SurfaceHit {
  double t;
  int object_id;
  int face_id;
  Vec3 bary;
};

/// Nearest hit over every face of every mesh, scanned in order. Ties on t keep
/// the first face encountered. The bounding-box rejection is conservative and
/// never changes the result of the brute-force scan.
std::optional<SurfaceHit> nearest_hit(const Vec3& origin, const Vec3& direction,
                                      std::span<const MeshView> meshes);

}  // namespace gc4d
