#pragma once

#include <cstdint>
#include <vector>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

struct Gripper {
  double max_width = 0.12;
  double finger_length = 0.05;
};

struct GraspParams {
  double friction_cone = 0.2617993877991494;  // half-angle, 15 degrees
  std::size_t normal_neighbors = 12;
  std::size_t max_anchors = 400;      // anchor points sampled per call
  std::size_t max_candidates = 48;    // best candidates kept
  double min_width = 0.005;
  double weight_antipodal = 0.5;
  double weight_center = 0.5;
};

/// Two-finger grasp. The gripper travels along `approach` (horizontal, the
/// view direction of the rotation that produced it) and closes along the
/// contact axis.
struct GraspCandidate {
  Vec3 position = Vec3::Zero();  // midpoint of the contacts
  Vec3 approach = Vec3::UnitX();
  Vec3 contact_a = Vec3::Zero();
  Vec3 contact_b = Vec3::Zero();
  double width = 0.0;
  double antipodality = 0.0;  // 0 at the cone boundary, 1 for exactly opposed normals
  double quality = 0.0;
  int rotation = 0;

  double approach_yaw() const;
  Vec3 closing_axis() const { return (contact_b - contact_a).normalized(); }
  /// Gripper frame: x along approach, y along the closing axis, origin at position.
  RigidTransform approach_pose() const;
};

/// Surface normals from k-nearest-neighbor PCA, flipped away from the centroid.
std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, std::size_t k);

/// True when the pair satisfies the width bound and both normals lie inside
/// the friction cone around the contact axis.
bool is_antipodal(const Vec3& a, const Vec3& na, const Vec3& b, const Vec3& nb, const Gripper& gripper,
                  double friction_cone);

/// Antipodal pairs seen from `n_rotations` horizontal viewing directions.
/// A pair is usable from view k when its axis is within pi / n of
/// perpendicular to the view. quality = w_a * antipodality + w_c * (1 -
/// |midpoint - centroid| / diag). Sorted by descending quality.
/// Throws insufficient_points (fewer than 20 or degenerate), no_grasp_found,
/// invalid_argument.
std::vector<GraspCandidate> generate_grasp_candidates(const PointCloud& object, const Gripper& gripper,
                                                      int n_rotations, std::uint64_t seed,
                                                      const GraspParams& params = {});

}  // namespace dollhouse
