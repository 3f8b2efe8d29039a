#pragma once

#include <string>
#include <vector>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

/// Region in which drop commands are accepted: a simple polygon on the floor
/// plus a reachable height band measured from the floor.
struct Workspace {
  std::vector<Vec2> polygon;
  double z_min = 0.0;
  double z_max = 1.0;

  bool contains_xy(const Vec2& p) const;
};

/// Point-in-polygon by crossing parity; points on an edge may land either way.
bool point_in_polygon(const std::vector<Vec2>& polygon, const Vec2& p);

struct DrawerModel {
  int id = 0;
  Vec3 anchor = Vec3::Zero();  // handle position when closed
  Vec3 slide_axis = Vec3::UnitX();
  double max_extension = 0.3;
  double opening = 0.0;

  Vec3 handle_position() const { return anchor + opening * slide_axis; }
};

/// Named horizontal support (furniture top). `top.min.z == top.max.z` is the surface height.
struct SupportSurface {
  std::string name;
  Aabb top;
};

struct ObjectInstance {
  int id = 0;
  std::string label;
  PointCloud cloud;
  /// Placement reference of the object as scanned: cloud centroid in x/y, lowest point in z.
  /// Drop points name where this reference should land.
  Vec3 origin_pose = Vec3::Zero();
  Aabb aabb;
  bool movable = true;
};

/// Placement reference (centroid x/y, base z) of a cloud.
Vec3 base_point(const std::vector<Vec3>& points);

/// Fills origin_pose and aabb from the cloud.
ObjectInstance make_instance(int id, std::string label, PointCloud cloud, bool movable = true);

struct SceneBundle {
  PointCloud static_cloud;
  std::vector<ObjectInstance> objects;
  std::vector<DrawerModel> drawers;
  Workspace workspace;
  double floor_height = 0.0;
  std::vector<SupportSurface> supports;
  Pose2 robot_start;

  /// Checks ids 0..n-1, non-empty object clouds, origins inside the static
  /// extent, polygon with >= 3 vertices and area. Throws bundle_mismatch.
  void validate() const;
};

/// Name of the support under `p` ("floor" when none matches within `tol`).
std::string support_name_at(const SceneBundle& bundle, const Vec3& p, double tol = 0.05);

double polygon_area(const std::vector<Vec2>& polygon);

}  // namespace dollhouse
