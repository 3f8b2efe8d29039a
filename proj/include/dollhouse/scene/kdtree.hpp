#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Static 3-d tree over a copy of the input positions. Read-only after
/// construction, so concurrent queries are safe.
///
/// All queries are exact. Equidistant results are ordered by lowest index.
class KdTree {
 public:
  /// Throws empty_cloud.
  explicit KdTree(std::vector<Vec3> points);
  explicit KdTree(const PointCloud& cloud) : KdTree(cloud.points) {}

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t index) const { return points_[index]; }

  Neighbor nearest(const Vec3& query) const;

  /// Indices of all points with distance <= radius, ascending by index.
  std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;

  /// k closest points sorted by (distance, index).
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest_rec(std::int32_t node, const Vec3& q, double& best_d2, std::size_t& best) const;
  void radius_rec(std::int32_t node, const Vec3& q, double r2, std::vector<std::size_t>& out) const;
  void knn_rec(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace dollhouse
