#include "dollhouse/scene/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

constexpr std::uint32_t kLeafSize = 12;

bool closer(double d2a, std::size_t ia, double d2b, std::size_t ib) {
  return d2a < d2b || (d2a == d2b && ia < ib);
}

}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorKind::empty_cloud, "kd-tree over empty cloud");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident: keep as leaf

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

Neighbor KdTree::nearest(const Vec3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  nearest_rec(0, query, best_d2, best);
  return {best, std::sqrt(best_d2)};
}

void KdTree::nearest_rec(std::int32_t id, const Vec3& q, double& best_d2, std::size_t& best) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (closer(d2, idx, best_d2, best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const auto near = diff <= 0.0 ? n.left : n.right;
  const auto far = diff <= 0.0 ? n.right : n.left;
  nearest_rec(near, q, best_d2, best);
  if (diff * diff <= best_d2) nearest_rec(far, q, best_d2, best);
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius) const {
  std::vector<std::size_t> out;
  if (radius < 0.0) return out;
  radius_rec(0, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::radius_rec(std::int32_t id, const Vec3& q, double r2, std::vector<std::size_t>& out) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto idx = order_[i];
      if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const auto near = diff <= 0.0 ? n.left : n.right;
  const auto far = diff <= 0.0 ? n.right : n.left;
  radius_rec(near, q, r2, out);
  if (diff * diff <= r2) radius_rec(far, q, r2, out);
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> heap;  // Neighbor::distance holds squared distance during search
  if (k == 0) return heap;
  heap.reserve(k + 1);
  knn_rec(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), [](const Neighbor& a, const Neighbor& b) {
    return closer(a.distance, a.index, b.distance, b.index);
  });
  for (auto& n : heap) n.distance = std::sqrt(n.distance);
  return heap;
}

void KdTree::knn_rec(std::int32_t id, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const {
  const auto cmp = [](const Neighbor& a, const Neighbor& b) {
    return closer(a.distance, a.index, b.distance, b.index);
  };
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (heap.size() < k) {
        heap.push_back({idx, d2});
        std::push_heap(heap.begin(), heap.end(), cmp);
      } else if (closer(d2, idx, heap.front().distance, heap.front().index)) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        heap.back() = {idx, d2};
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const auto near = diff <= 0.0 ? n.left : n.right;
  const auto far = diff <= 0.0 ? n.right : n.left;
  knn_rec(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().distance) knn_rec(far, q, k, heap);
}

}  // namespace dollhouse
