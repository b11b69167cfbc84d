#include "gc4d/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gc4d {

namespace {

constexpr double kMinT = 1e-9;
constexpr double kEdgeEps = 1e-12;

bool ray_hits_box(const Vec3& origin, const Vec3& direction, const Eigen::AlignedBox3d& box) {
  if (box.isEmpty()) return false;
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double pad = 1e-9 * (1.0 + std::abs(box.min()[k]) + std::abs(box.max()[k]));
    const double lo = box.min()[k] - pad;
    const double hi = box.max()[k] + pad;
    if (direction[k] == 0.0) {
      if (origin[k] < lo || origin[k] > hi) return false;
      continue;
    }
    double a = (lo - origin[k]) / direction[k];
    double b = (hi - origin[k]) / direction[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  // Slightly widened interval keeps the test conservative under rounding.
  const double slack = 1e-9 * (1.0 + std::abs(t1));
  return t1 + slack >= std::max(t0, 0.0);
}

}  // namespace

std::optional<RayHit> raycast(const Vec3& origin, const Vec3& direction, const Vec3& v0,
                              const Vec3& v1, const Vec3& v2) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 pvec = direction.cross(e2);
  const double det = e1.dot(pvec);
  const double scale = e1.norm() * e2.norm() * direction.norm();
  if (!(std::abs(det) > 1e-14 * scale)) return std::nullopt;
  const double inv_det = 1.0 / det;

  const Vec3 tvec = origin - v0;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kEdgeEps || u > 1.0 + kEdgeEps) return std::nullopt;

  const Vec3 qvec = tvec.cross(e1);
  const double v = direction.dot(qvec) * inv_det;
  if (v < -kEdgeEps || u + v > 1.0 + kEdgeEps) return std::nullopt;

  const double t = e2.dot(qvec) * inv_det;
  if (!(t > kMinT)) return std::nullopt;
  return RayHit{t, Vec3(1.0 - u - v, u, v)};
}

MeshView make_mesh_view(int object_id, std::span<const Vec3> vertices,
                        std::span<const Face> faces) {
  MeshView view{object_id, vertices, faces, Eigen::AlignedBox3d()};
  for (const auto& f : faces) {
    for (int k : f) view.bounds.extend(vertices[static_cast<std::size_t>(k)]);
  }
  return view;
}

std::optional<SurfaceHit> nearest_hit(const Vec3& origin, const Vec3& direction,
                                      std::span<const MeshView> meshes) {
  std::optional<SurfaceHit> best;
  for (const auto& mesh : meshes) {
    if (!ray_hits_box(origin, direction, mesh.bounds)) continue;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const Face& face = mesh.faces[f];
      const auto hit = raycast(origin, direction, mesh.vertices[static_cast<std::size_t>(face[0])],
                               mesh.vertices[static_cast<std::size_t>(face[1])],
                               mesh.vertices[static_cast<std::size_t>(face[2])]);
      if (hit && (!best || hit->t < best->t)) {
        best = SurfaceHit{hit->t, mesh.object_id, static_cast<int>(f), hit->bary};
      }
    }
  }
  return best;
}

}  // namespace gc4d
