#pragma once

#include <cstddef>
#include <vector>

#include "dollhouse/scene/geometry.hpp"
#include "dollhouse/scene/kdtree.hpp"

namespace dollhouse {

enum class IcpMetric {
  point_to_point,
  /// Distance along the target normal. Slides freely along planar regions,
  /// so floor-dominated scenes converge in a few iterations.
  point_to_plane,
};

struct IcpParams {
  int max_iterations = 50;
  double convergence_eps = 1e-5;       // mean per-point shift between iterations (m)
  double max_correspondence_dist = 0.25;  // pairs farther apart are rejected (m)
  std::size_t max_source_points = 5000;   // source is voxel-subsampled to this budget
  IcpMetric metric = IcpMetric::point_to_point;
  std::size_t normal_neighbors = 10;       // point_to_plane: k for target normals
};

struct IcpResult {
  RigidTransform transform;
  /// Truncated RMSE over all (subsampled) source points: each residual is
  /// capped at max_correspondence_dist. Non-increasing across iterations
  /// for point_to_point.
  double rmse = 0.0;
  /// RMSE over accepted correspondences only.
  double inlier_rmse = 0.0;
  double inlier_fraction = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> rmse_history;  // rmse before the first update, then after each iteration
};

/// Point-to-point ICP: maps `source` onto `target` starting from `init`.
/// Throws empty_cloud, degenerate_source (fewer than 3 non-collinear points).
IcpResult icp_align(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                    const IcpParams& params = {});

/// Same, reusing a prebuilt index over the target. point_to_plane estimates
/// target normals on every call; use IcpTarget to reuse them.
IcpResult icp_align(const PointCloud& source, const KdTree& target, const RigidTransform& init,
                    const IcpParams& params = {});

/// Target index plus k-nearest-neighbor PCA normals, reusable across calls.
struct IcpTarget {
  IcpTarget(std::vector<Vec3> points, std::size_t normal_neighbors = 10);

  KdTree tree;
  std::vector<Vec3> normals;
};

IcpResult icp_align(const PointCloud& source, const IcpTarget& target, const RigidTransform& init,
                    const IcpParams& params = {});

/// Least-squares rigid transform mapping `from[i]` onto `to[i]` (Kabsch with
/// reflection guard).
RigidTransform fit_rigid(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

}  // namespace dollhouse
