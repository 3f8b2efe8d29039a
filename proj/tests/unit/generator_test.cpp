#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dollhouse/error.hpp"
#include "dollhouse/scene/generator.hpp"

namespace dollhouse {
namespace {

/// Analytic bounds of an object spec (yaw must be 0).
Aabb expected_bounds(const ObjectSpec& o) {
  std::vector<Vec3> corners;
  for (const auto& part : o.resolved_parts()) {
    const Vec3 base = o.position + part.offset;
    const double hx = 0.5 * part.size.x();
    const double hy = part.shape == Shape::box ? 0.5 * part.size.y() : hx;
    const double h = part.shape == Shape::sphere ? part.size.x() : part.size.z();
    corners.push_back(base + Vec3(-hx, -hy, 0.0));
    corners.push_back(base + Vec3(hx, hy, h));
  }
  return Aabb::from_points(corners);
}

TEST(Generator, FloorOnlyScene) {
  SceneSpec spec;
  spec.room_extent = {2.0, 1.5, 0.0};
  spec.floor_height = 0.3;
  spec.density = 2000;
  spec.noise_sigma = 0.001;
  const GeneratedScene g = generate_scene(spec);
  ASSERT_GT(g.high_cloud.size(), 5000u);
  for (const auto& p : g.high_cloud.points) EXPECT_LT(std::abs(p.z() - 0.3), 6 * spec.noise_sigma);
  EXPECT_TRUE(g.ground_truth.objects.empty());
  EXPECT_EQ(g.ground_truth.static_cloud.size(), g.high_cloud.size());
}

TEST(Generator, DeterministicUnderSeed) {
  SceneSpec spec = default_scene_spec();
  spec.density = 1500;
  const GeneratedScene a = generate_scene(spec);
  const GeneratedScene b = generate_scene(spec);
  EXPECT_EQ(a.high_cloud.points, b.high_cloud.points);
  EXPECT_EQ(a.high_cloud.labels, b.high_cloud.labels);
  EXPECT_EQ(a.low_cloud.points, b.low_cloud.points);
  EXPECT_EQ(a.scan_offset.rotation, b.scan_offset.rotation);
  spec.seed += 1;
  const GeneratedScene c = generate_scene(spec);
  EXPECT_NE(a.high_cloud.points, c.high_cloud.points);
}

TEST(Generator, DefaultSceneInstancesMatchSpecBounds) {
  const SceneSpec spec = default_scene_spec();
  const GeneratedScene g = generate_scene(spec);
  const auto& objects = g.ground_truth.objects;
  ASSERT_EQ(objects.size(), 6u);
  const std::vector<std::string> labels{"white_can", "green_can", "green_mug", "black_bottle", "blue_plush", "cow_plush"};
  // Extremes of a few hundred Gaussian draws reach ~3-4 sigma.
  const double tol = 5.0 * spec.noise_sigma;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    EXPECT_EQ(objects[i].id, static_cast<int>(i));
    EXPECT_EQ(objects[i].label, labels[i]);
    const Aabb want = expected_bounds(spec.objects[i]);
    EXPECT_LT((objects[i].aabb.min - want.min).cwiseAbs().maxCoeff(), tol) << labels[i];
    EXPECT_LT((objects[i].aabb.max - want.max).cwiseAbs().maxCoeff(), tol) << labels[i];
    EXPECT_LT((objects[i].origin_pose.head<2>() - spec.objects[i].position.head<2>()).norm(), 0.03) << labels[i];
  }
  EXPECT_EQ(g.ground_truth.drawers.size(), 1u);
  EXPECT_EQ(g.ground_truth.supports.size(), 2u);
  g.ground_truth.validate();
}

TEST(Generator, LowScanIsSparseAndRegistersOntoSurfaces) {
  SceneSpec spec = default_scene_spec();
  spec.density = 3000;
  const GeneratedScene g = generate_scene(spec);
  EXPECT_LE(static_cast<double>(g.low_cloud.size()), 0.25 * static_cast<double>(g.high_cloud.size()));
  EXPECT_LE(rotation_angle(g.scan_offset.rotation), spec.max_offset_rotation + 1e-12);
  EXPECT_LE(g.scan_offset.translation.norm(), spec.max_offset_translation + 1e-12);

  const PointCloud aligned = apply_transform(g.low_cloud, invert(g.scan_offset));
  std::size_t near = 0;
  for (const auto& p : aligned.points) {
    if (surface_distance(spec, p) <= 3.0 * spec.noise_sigma) ++near;
  }
  EXPECT_GE(static_cast<double>(near), 0.99 * static_cast<double>(aligned.size()));
}

TEST(Generator, RejectsFloatingObject) {
  SceneSpec spec = default_scene_spec();
  spec.objects[1].position.z() = 0.2;
  try {
    validate_spec(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_spec);
  }
}

TEST(Generator, RejectsOverlappingObjects) {
  SceneSpec spec = default_scene_spec();
  spec.objects[4].position = spec.objects[3].position + Vec3(0.03, 0.0, 0.0);
  EXPECT_THROW(validate_spec(spec), Error);
}

TEST(Generator, RejectsBadDensityAndDrawer) {
  SceneSpec spec = default_scene_spec();
  spec.density = 0;
  EXPECT_THROW(validate_spec(spec), Error);
  spec = default_scene_spec();
  spec.drawers[0].max_extension = 0;
  EXPECT_THROW(validate_spec(spec), Error);
}

TEST(Generator, SpecFileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "dollhouse_spec.json";
  const SceneSpec spec = default_scene_spec();
  save_scene_spec(spec, path);
  const SceneSpec back = load_scene_spec(path);
  ASSERT_EQ(back.objects.size(), spec.objects.size());
  EXPECT_EQ(back.objects[2].parts.size(), 2u);
  EXPECT_NEAR(back.max_offset_rotation, spec.max_offset_rotation, 1e-12);
  EXPECT_EQ(back.furniture[1].name, "cabinet");
  SceneSpec small = back;
  small.density = 800;
  SceneSpec small_orig = spec;
  small_orig.density = 800;
  EXPECT_EQ(generate_scene(small).high_cloud.points, generate_scene(small_orig).high_cloud.points);
}

}  // namespace
}  // namespace dollhouse
