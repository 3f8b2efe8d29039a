#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dollhouse/scene/bundle.hpp"
#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

enum class Shape { box, cylinder, sphere, composite };

std::string_view to_string(Shape shape);
Shape shape_from_string(const std::string& name);

/// One solid of an object. `offset` is the part's base center in the object
/// frame. Box size is its extents; cylinder uses size.x as diameter and size.z
/// as height; sphere uses size.x as diameter.
struct PrimitivePart {
  Shape shape = Shape::box;
  Vec3 offset = Vec3::Zero();
  Vec3 size = Vec3::Zero();
};

struct ObjectSpec {
  std::string label;
  Shape shape = Shape::box;
  Vec3 position = Vec3::Zero();  // base center; z must be a support height
  double yaw = 0.0;
  Vec3 size = Vec3::Zero();               // non-composite shapes
  std::vector<PrimitivePart> parts;       // composite shapes

  std::vector<PrimitivePart> resolved_parts() const;
};

/// Axis-aligned furniture box standing on the floor.
struct FurnitureSpec {
  std::string name;
  Vec3 position = Vec3::Zero();  // base center
  Vec3 size = Vec3::Zero();

  double top_height() const { return position.z() + size.z(); }
};

struct DrawerSpec {
  Vec3 anchor = Vec3::Zero();
  Vec3 slide_axis = Vec3::UnitX();
  double max_extension = 0.3;
};

/// Synthetic room. The room spans [0, x] x [0, y] with walls of height z
/// (no walls when z is 0).
struct SceneSpec {
  Vec3 room_extent{5.0, 4.0, 1.0};
  double floor_height = 0.0;
  std::vector<FurnitureSpec> furniture;
  std::vector<ObjectSpec> objects;
  std::vector<DrawerSpec> drawers;
  double density = 6000.0;  // points per m^2 of visible surface
  double noise_sigma = 0.002;
  std::uint64_t seed = 7;

  double low_density_ratio = 0.2;
  double max_offset_translation = 0.3;
  double max_offset_rotation = 0.2617993877991494;  // 15 degrees

  std::vector<Vec2> workspace_polygon;  // empty: room inset by workspace_margin
  double workspace_margin = 0.1;
  double reach_z_min = 0.0;
  double reach_z_max = 1.0;
  Pose2 robot_start{2.5, 2.0, 0.0};
};

struct GeneratedScene {
  PointCloud high_cloud;  // labels: object index, -1 for static surfaces
  PointCloud low_cloud;   // sparser rescan expressed through scan_offset
  SceneBundle ground_truth;
  RigidTransform scan_offset;
};

/// Throws invalid_spec.
void validate_spec(const SceneSpec& spec);

/// Deterministic for a fixed spec (including seed).
GeneratedScene generate_scene(const SceneSpec& spec);

/// Distance from `p` to the nearest sampled surface patch of the spec.
double surface_distance(const SceneSpec& spec, const Vec3& p);

/// Room with a shelf, a cabinet with one drawer, and six objects modeled on
/// the pick-and-place test set (two cans, mug, bottle, two plushies).
SceneSpec default_scene_spec();

SceneSpec load_scene_spec(const std::filesystem::path& path);
void save_scene_spec(const SceneSpec& spec, const std::filesystem::path& path);

}  // namespace dollhouse
