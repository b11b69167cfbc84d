#pragma once

#include "gc4d/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gc4d {

/// dx*dx + dy*dy + dz*dz in a fixed order; every distance in the metrics code
/// goes through this so indexed and brute-force searches agree bit for bit.
inline double squared_distance(const Vec3& a, const Vec3& b) noexcept {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// Static 3-d tree over a copy of the input points. Queries are exact: the
/// pruning test only discards cells strictly farther than the current best.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index;
    double squared_distance;
  };

  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 12);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// Nearest point; ties resolved toward the smaller index.
  Neighbor nearest(const Vec3& query) const;

  /// k nearest points sorted by (distance, index). k is clamped to size().
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::int32_t node, const Vec3& q, Neighbor& best) const;
  void search_knn(std::int32_t node, const Vec3& q, std::size_t k,
                  std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace gc4d
