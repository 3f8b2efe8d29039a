#include "dollhouse/scene/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dollhouse/error.hpp"

namespace dollhouse {

std::string_view to_tag(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::malformed_file: return "malformed_file";
    case ErrorKind::unsupported_format: return "unsupported_format";
    case ErrorKind::io_failure: return "io_failure";
    case ErrorKind::empty_cloud: return "empty_cloud";
    case ErrorKind::non_positive_voxel: return "non_positive_voxel";
    case ErrorKind::invalid_spec: return "invalid_spec";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::degenerate_source: return "degenerate_source";
    case ErrorKind::no_plane_found: return "no_plane_found";
    case ErrorKind::overlapping_clusters: return "overlapping_clusters";
    case ErrorKind::start_blocked: return "start_blocked";
    case ErrorKind::goal_blocked: return "goal_blocked";
    case ErrorKind::no_path_found: return "no_path_found";
    case ErrorKind::insufficient_points: return "insufficient_points";
    case ErrorKind::no_grasp_found: return "no_grasp_found";
    case ErrorKind::no_feasible_pose: return "no_feasible_pose";
    case ErrorKind::illegal_command: return "illegal_command";
    case ErrorKind::empty_capture: return "empty_capture";
    case ErrorKind::bundle_mismatch: return "bundle_mismatch";
  }
  return "unknown";
}

void PointCloud::validate() const {
  if (!labels.empty() && labels.size() != points.size()) {
    throw Error(ErrorKind::invalid_argument, "label count " + std::to_string(labels.size()) +
                                                 " != point count " + std::to_string(points.size()));
  }
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorKind::invalid_argument, "non-finite coordinate");
  }
}

void PointCloud::push_back(const Vec3& p, int label) {
  points.push_back(p);
  labels.push_back(label);
}

RigidTransform RigidTransform::from_yaw(double yaw, const Vec3& translation) {
  return from_axis_angle(Vec3::UnitZ(), yaw, translation);
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle,
                                               const Vec3& translation) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  t.translation = translation;
  return t;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

double rotation_angle(const Mat3& rotation) {
  // atan2 form stays accurate near 0 and pi, unlike acos((tr - 1) / 2).
  const Vec3 axis_sin(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                      rotation(1, 0) - rotation(0, 1));
  const double cos_part = rotation.trace() - 1.0;
  return std::atan2(axis_sin.norm(), cos_part);
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t(p));
  out.labels = cloud.labels;
  return out;
}

Aabb Aabb::from_points(const std::vector<Vec3>& points) {
  if (points.empty()) throw Error(ErrorKind::empty_cloud, "bounding box of no points");
  Aabb box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

bool Aabb::contains(const Vec3& p, double slack) const {
  return (p.array() >= min.array() - slack).all() && (p.array() <= max.array() + slack).all();
}

Vec3 centroid(const std::vector<Vec3>& points) {
  if (points.empty()) throw Error(ErrorKind::empty_cloud, "centroid of no points");
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  angle = std::fmod(angle + std::numbers::pi, two_pi);
  if (angle < 0.0) angle += two_pi;
  return angle - std::numbers::pi;
}

RigidTransform to_transform(const Pose2& pose) {
  return RigidTransform::from_yaw(pose.theta, Vec3(pose.x, pose.y, 0.0));
}

}  // namespace dollhouse
