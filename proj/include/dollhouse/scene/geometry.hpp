#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <vector>

namespace dollhouse {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Positions in meters with optional per-point instance ids (-1 = unlabeled).
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws invalid_argument on non-finite coordinates or a label/point length mismatch.
  void validate() const;
  void push_back(const Vec3& p, int label);
};

/// Rotation + translation acting as p -> R p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_yaw(double yaw, const Vec3& translation = Vec3::Zero());
  static RigidTransform from_axis_angle(const Vec3& axis, double angle,
                                        const Vec3& translation = Vec3::Zero());

  Vec3 operator()(const Vec3& p) const { return rotation * p + translation; }
};

/// compose(a, b) applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

/// Angle of the rotation part in radians, in [0, pi].
double rotation_angle(const Mat3& rotation);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  /// Throws empty_cloud when `points` is empty.
  static Aabb from_points(const std::vector<Vec3>& points);

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p, double slack = 0.0) const;
};

Vec3 centroid(const std::vector<Vec3>& points);

/// Planar pose on the floor: position in meters, heading in radians.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
};

double wrap_angle(double angle);

/// Lifts a planar pose to a 3D transform (rotation about +z, no height).
RigidTransform to_transform(const Pose2& pose);

}  // namespace dollhouse
