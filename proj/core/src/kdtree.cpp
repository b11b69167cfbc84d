#include "gc4d/kdtree.hpp"

#include "gc4d/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace gc4d {

namespace {

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "KdTree: too many points");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1, 0, 0.0});
  if (end - begin <= leaf_size_) return id;

  Eigen::AlignedBox3d box;
  for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
  int axis = 0;
  box.sizes().maxCoeff(&axis);
  if (box.sizes()[axis] == 0.0) return id;  // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) throw Error(ErrorCode::EmptyReference, "KdTree: nearest on empty tree");
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  search_nearest(0, query, best);
  return best;
}

void KdTree::search_nearest(std::int32_t id, const Vec3& q, Neighbor& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], squared_distance(points_[order_[i]], q)};
      if (closer(cand, best)) best = cand;
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near_child = diff < 0.0 ? node.left : node.right;
  const std::int32_t far_child = diff < 0.0 ? node.right : node.left;
  search_nearest(near_child, q, best);
  if (diff * diff <= best.squared_distance) search_nearest(far_child, q, best);
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  if (points_.empty()) throw Error(ErrorCode::EmptyReference, "KdTree: knn on empty tree");
  k = std::min(k, points_.size());
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  if (k == 0) return heap;
  search_knn(0, query, k, heap);
  std::sort(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::search_knn(std::int32_t id, const Vec3& q, std::size_t k,
                        std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], squared_distance(points_[order_[i]], q)};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near_child = diff < 0.0 ? node.left : node.right;
  const std::int32_t far_child = diff < 0.0 ? node.right : node.left;
  search_knn(near_child, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().squared_distance) {
    search_knn(far_child, q, k, heap);
  }
}

}  // namespace gc4d
