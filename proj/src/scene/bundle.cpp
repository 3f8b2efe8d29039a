#include "dollhouse/scene/bundle.hpp"

#include <cmath>

#include "dollhouse/error.hpp"

namespace dollhouse {

bool point_in_polygon(const std::vector<Vec2>& polygon, const Vec2& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool Workspace::contains_xy(const Vec2& p) const { return point_in_polygon(polygon, p); }

double polygon_area(const std::vector<Vec2>& polygon) {
  double twice = 0.0;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    twice += polygon[j].x() * polygon[i].y() - polygon[i].x() * polygon[j].y();
  }
  return 0.5 * std::abs(twice);
}

Vec3 base_point(const std::vector<Vec3>& points) {
  const Vec3 c = centroid(points);
  double zmin = points.front().z();
  for (const auto& p : points) zmin = std::min(zmin, p.z());
  return {c.x(), c.y(), zmin};
}

ObjectInstance make_instance(int id, std::string label, PointCloud cloud, bool movable) {
  if (cloud.empty()) throw Error(ErrorKind::empty_cloud, "object instance " + std::to_string(id));
  ObjectInstance obj;
  obj.id = id;
  obj.label = std::move(label);
  obj.origin_pose = base_point(cloud.points);
  obj.aabb = Aabb::from_points(cloud.points);
  obj.cloud = std::move(cloud);
  obj.movable = movable;
  return obj;
}

void SceneBundle::validate() const {
  static_cloud.validate();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id != static_cast<int>(i)) {
      throw Error(ErrorKind::bundle_mismatch, "object ids must be 0..n-1");
    }
    if (objects[i].cloud.empty()) throw Error(ErrorKind::bundle_mismatch, "empty object cloud");
    objects[i].cloud.validate();
  }
  if (!static_cloud.empty()) {
    const Aabb extent = Aabb::from_points(static_cloud.points);
    for (const auto& o : objects) {
      if (!extent.contains(o.origin_pose, 0.05)) {
        throw Error(ErrorKind::bundle_mismatch, "object " + std::to_string(o.id) + " lies outside the scene");
      }
    }
  }
  if (workspace.polygon.size() < 3 || polygon_area(workspace.polygon) <= 0.0) {
    throw Error(ErrorKind::bundle_mismatch, "workspace polygon is degenerate");
  }
  if (!(workspace.z_min < workspace.z_max)) {
    throw Error(ErrorKind::bundle_mismatch, "workspace height band is empty");
  }
  for (const auto& d : drawers) {
    if (!(d.max_extension > 0.0) || std::abs(d.slide_axis.norm() - 1.0) > 1e-6) {
      throw Error(ErrorKind::bundle_mismatch, "drawer " + std::to_string(d.id) + " parameters");
    }
  }
}

std::string support_name_at(const SceneBundle& bundle, const Vec3& p, double tol) {
  for (const auto& s : bundle.supports) {
    const bool over = p.x() >= s.top.min.x() - tol && p.x() <= s.top.max.x() + tol &&
                      p.y() >= s.top.min.y() - tol && p.y() <= s.top.max.y() + tol;
    if (over && std::abs(p.z() - s.top.max.z()) <= tol) return s.name;
  }
  return "floor";
}

}  // namespace dollhouse
