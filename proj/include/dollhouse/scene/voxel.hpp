#pragma once

#include <array>
#include <cstdint>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

using VoxelKey = std::array<std::int64_t, 3>;

VoxelKey voxel_key(const Vec3& p, double voxel);

/// One point per occupied voxel at the centroid of its members. Output order
/// follows first occurrence; the label is the voxel's majority label (lowest
/// label wins ties). Throws non_positive_voxel.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Like voxel_downsample, but keeps the member closest to each voxel centroid
/// so every output point is an input point. Returns input indices.
std::vector<std::size_t> voxel_subsample_indices(const std::vector<Vec3>& points, double voxel);

/// Grows the voxel edge until at most `max_points` remain. Returns indices
/// into `points` (all of them when already small enough).
std::vector<std::size_t> subsample_to_budget(const std::vector<Vec3>& points, std::size_t max_points);

}  // namespace dollhouse
