#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include "dollhouse/error.hpp"
#include "dollhouse/planning/grasp.hpp"
#include "dollhouse/planning/occupancy.hpp"
#include "dollhouse/planning/pose_opt.hpp"
#include "dollhouse/planning/rrt.hpp"
#include "dollhouse/scene/generator.hpp"
#include "support/random_cloud.hpp"

namespace dollhouse {
namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::invalid_argument;
}

/// Free grid over [x0, x0 + w*res) x [y0, y0 + h*res).
OccupancyGrid open_grid(double x0, double y0, int w, int h, double res = 0.05) {
  OccupancyGrid g({x0, y0}, res, w, h);
  g.inflate(0.0);
  return g;
}

void block_rect(OccupancyGrid& g, const Vec2& lo, const Vec2& hi) {
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const Vec2 c = g.center_of({x, y});
      if ((c.array() >= lo.array()).all() && (c.array() <= hi.array()).all()) g.mark({x, y});
    }
  }
}

bool path_valid(const OccupancyGrid& g, const std::vector<Vec2>& path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 a = path[i - 1];
    const Vec2 b = path[i];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / (0.5 * g.resolution()))));
    for (int k = 0; k <= n; ++k) {
      const auto c = g.cell_of(a + (b - a) * (static_cast<double>(k) / n));
      if (!c || g.occupied(*c)) return false;
    }
  }
  return true;
}

TEST(OccupancyGrid, SinglePointMarksOneCell) {
  PointCloud c;
  c.points = {{1.0, 1.0, 0.5}};
  const OccupancyGrid g = build_occupancy_grid(c, 0.0, 0.1, 1.0, 0.1, 0.0);
  EXPECT_EQ(g.raw_count(), 1u);
  EXPECT_EQ(g.occupied_count(), 1u);
  EXPECT_TRUE(g.raw_occupied(*g.cell_of({1.0, 1.0})));
  EXPECT_FALSE(g.empty_band());
}

TEST(OccupancyGrid, InflationIsEuclideanDisc) {
  PointCloud c;
  c.points = {{1.0, 1.0, 0.5}};
  const OccupancyGrid g = build_occupancy_grid(c, 0.0, 0.1, 1.0, 0.1, 0.2);
  EXPECT_EQ(g.occupied_count(), 13u);
  const Cell center = *g.cell_of({1.0, 1.0});
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const int dx = x - center.x;
      const int dy = y - center.y;
      EXPECT_EQ(g.occupied({x, y}), dx * dx + dy * dy <= 4) << x << "," << y;
    }
  }
}

TEST(OccupancyGrid, PointsOutsideBandLeaveGridFree) {
  PointCloud c;
  c.points = {{0.0, 0.0, 0.02}, {1.0, 1.0, 0.05}, {0.5, 0.5, 1.5}};
  const OccupancyGrid g = build_occupancy_grid(c, 0.0, 0.1, 1.0, 0.1, 0.3);
  EXPECT_EQ(g.occupied_count(), 0u);
  EXPECT_TRUE(g.empty_band());
  EXPECT_THROW(build_occupancy_grid(c, 0.0, 1.0, 0.5, 0.1, 0.0), Error);
  EXPECT_THROW(build_occupancy_grid(c, 0.0, 0.1, 1.0, 0.0, 0.0), Error);
}

TEST(OccupancyGrid, InflatedContainsRawAndClearanceIsBounded) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PointCloud c = testing::random_cloud(40, seed, 0.0, 3.0);
    const OccupancyGrid g = build_occupancy_grid(c, 0.0, 0.1, 2.0, 0.05, 0.15);
    for (int y = 0; y < g.height(); ++y) {
      for (int x = 0; x < g.width(); ++x) {
        if (g.raw_occupied({x, y})) {
          EXPECT_TRUE(g.occupied({x, y}));
        }
        const double cl = g.clearance_at(g.center_of({x, y}));
        EXPECT_GE(cl, 0.0);
        EXPECT_LE(cl, g.clearance_cap());
        if (g.occupied({x, y})) {
          EXPECT_EQ(cl, 0.0);
        }
      }
    }
  }
}

TEST(Rrt, SegmentClippingACellCornerIsBlocked) {
  OccupancyGrid g = open_grid(0.0, 0.0, 20, 20);
  g.mark({5, 5});
  g.inflate(0.0);
  // Passes 0.1 of a cell inside the corner of cell (5, 5); half-cell samples step over it.
  EXPECT_FALSE(segment_free(g, {0.245, 0.305}, {0.305, 0.245}));
  EXPECT_FALSE(segment_free(g, {0.0, 0.0}, {0.5, 0.5}));  // exactly through corners
  EXPECT_TRUE(segment_free(g, {0.0, 0.32}, {0.5, 0.32}));
}

TEST(Rrt, FreeSegmentsHaveNoOccupiedSample) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  OccupancyGrid g = open_grid(0.0, 0.0, 40, 40);
  for (int k = 0; k < 12; ++k) g.mark({static_cast<int>(u(rng) * 20), static_cast<int>(u(rng) * 20)});
  g.inflate(0.0);
  int free = 0;
  for (int k = 0; k < 3000; ++k) {
    const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng));
    if (!segment_free(g, a, b)) continue;
    ++free;
    const int n = static_cast<int>(std::ceil((b - a).norm() / (0.01 * g.resolution()))) + 1;
    for (int i = 0; i <= n; ++i) ASSERT_FALSE(g.occupied_at(a + (b - a) * (static_cast<double>(i) / n))) << k;
  }
  EXPECT_GT(free, 100);
}

TEST(Rrt, EmptyGridGivesNearlyStraightPath) {
  const OccupancyGrid g = open_grid(-1.0, -1.0, 100, 40);
  const RrtPath p = rrt_plan(g, {0.0, 0.0}, {3.0, 0.0});
  EXPECT_LE(path_length(p.waypoints), 3.0 * 1.05);
  EXPECT_EQ(p.waypoints.front(), Vec2(0.0, 0.0));
  EXPECT_EQ(p.waypoints.back(), Vec2(3.0, 0.0));
}

TEST(Rrt, WallWithGapIsCrossedThroughGap) {
  OccupancyGrid g = open_grid(0.0, 0.0, 80, 80);
  // Wall at x in [1.9, 2.1] with a 0.6 m gap centered at y = 3.0.
  block_rect(g, {1.9, 0.0}, {2.1, 2.7});
  block_rect(g, {1.9, 3.3}, {2.1, 4.0});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RrtParams params;
    params.seed = seed;
    const RrtPath p = rrt_plan(g, {0.5, 0.5}, {3.5, 0.5}, params);
    EXPECT_TRUE(path_valid(g, p.waypoints));
    EXPECT_LE(path_length(p.waypoints), p.raw_length + 1e-12);
    bool through_gap = false;
    for (std::size_t i = 1; i < p.waypoints.size(); ++i) {
      const Vec2 a = p.waypoints[i - 1];
      const Vec2 b = p.waypoints[i];
      if ((a.x() - 2.0) * (b.x() - 2.0) <= 0.0) {
        const double y = a.y() + (b.y() - a.y()) * (2.0 - a.x()) / (b.x() - a.x());
        through_gap = through_gap || (y > 2.7 && y < 3.3);
      }
    }
    EXPECT_TRUE(through_gap) << seed;
  }
}

TEST(Rrt, BlockedAndDisconnectedEndpoints) {
  OccupancyGrid g = open_grid(0.0, 0.0, 60, 60);
  block_rect(g, {2.0, 2.0}, {2.4, 2.4});
  EXPECT_EQ(kind_of([&] { rrt_plan(g, {0.5, 0.5}, {2.2, 2.2}); }), ErrorKind::goal_blocked);
  EXPECT_EQ(kind_of([&] { rrt_plan(g, {2.2, 2.2}, {0.5, 0.5}); }), ErrorKind::start_blocked);
  EXPECT_EQ(kind_of([&] { rrt_plan(g, {0.5, 0.5}, {-1.0, 0.5}); }), ErrorKind::goal_blocked);

  // A free pocket walled in on all sides.
  OccupancyGrid ring = open_grid(0.0, 0.0, 60, 60);
  block_rect(ring, {1.0, 1.0}, {2.0, 1.1});
  block_rect(ring, {1.0, 1.9}, {2.0, 2.0});
  block_rect(ring, {1.0, 1.0}, {1.1, 2.0});
  block_rect(ring, {1.9, 1.0}, {2.0, 2.0});
  EXPECT_EQ(kind_of([&] { rrt_plan(ring, {0.5, 0.5}, {1.5, 1.5}); }), ErrorKind::no_path_found);
}

TEST(Rrt, DeterministicUnderSeed) {
  OccupancyGrid g = open_grid(0.0, 0.0, 80, 80);
  block_rect(g, {1.0, 0.0}, {1.2, 3.0});
  block_rect(g, {2.4, 1.0}, {2.6, 4.0});
  RrtParams params;
  params.seed = 42;
  const RrtPath a = rrt_plan(g, {0.4, 0.4}, {3.6, 0.4}, params);
  const RrtPath b = rrt_plan(g, {0.4, 0.4}, {3.6, 0.4}, params);
  EXPECT_EQ(a.waypoints, b.waypoints);
  EXPECT_TRUE(path_valid(g, a.waypoints));
}

PointCloud sphere_cloud(double r, std::size_t n, std::uint64_t seed, const Vec3& c = Vec3::Zero()) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud out;
  for (std::size_t i = 0; i < n; ++i) out.points.push_back(c + r * Vec3(g(rng), g(rng), g(rng)).normalized());
  return out;
}

TEST(Grasp, SphereTopCandidateIsDiametral) {
  const Vec3 center(0.3, -0.2, 0.5);
  const PointCloud s = sphere_cloud(0.04, 3000, 1, center);
  Gripper gripper;
  gripper.max_width = 0.1;
  const auto cands = generate_grasp_candidates(s, gripper, 8, 7);
  ASSERT_FALSE(cands.empty());
  EXPECT_LT((cands.front().position - center).norm(), 0.005);
  EXPECT_NEAR(cands.front().width, 0.08, 0.002);
  for (std::size_t i = 1; i < cands.size(); ++i) EXPECT_GE(cands[i - 1].quality, cands[i].quality);
}

TEST(Grasp, OversizedBoxAndDegenerateInputs) {
  const PointCloud box = testing::box_surface({0.3, 0.3, 0.3}, 4000, 2);
  EXPECT_EQ(kind_of([&] { generate_grasp_candidates(box, Gripper{}, 8, 1); }), ErrorKind::no_grasp_found);
  PointCloud line;
  for (int i = 0; i < 5; ++i) line.points.emplace_back(0.01 * i, 0.0, 0.0);
  EXPECT_EQ(kind_of([&] { generate_grasp_candidates(line, Gripper{}, 8, 1); }), ErrorKind::insufficient_points);
  for (int i = 5; i < 40; ++i) line.points.emplace_back(0.01 * i, 0.0, 0.0);
  EXPECT_EQ(kind_of([&] { generate_grasp_candidates(line, Gripper{}, 8, 1); }), ErrorKind::insufficient_points);
}

TEST(Grasp, CandidatesSatisfyAntipodalTestPostHoc) {
  const std::vector<PointCloud> objects{testing::box_surface({0.06, 0.09, 0.2}, 2000, 3),
                                        sphere_cloud(0.05, 1500, 4)};
  const Gripper gripper;
  GraspParams params;
  for (const auto& obj : objects) {
    const auto normals = estimate_normals(obj.points, params.normal_neighbors);
    for (const auto& c : generate_grasp_candidates(obj, gripper, 8, 5, params)) {
      EXPECT_LE(c.width, gripper.max_width);
      std::size_t ia = obj.size();
      std::size_t ib = obj.size();
      for (std::size_t i = 0; i < obj.size(); ++i) {
        if (obj.points[i] == c.contact_a) ia = i;
        if (obj.points[i] == c.contact_b) ib = i;
      }
      ASSERT_LT(ia, obj.size());
      ASSERT_LT(ib, obj.size());
      EXPECT_TRUE(is_antipodal(obj.points[ia], normals[ia], obj.points[ib], normals[ib], gripper, params.friction_cone));
      EXPECT_GE(c.quality, 0.0);
      EXPECT_LE(c.quality, 1.0);
      const Mat3 r = c.approach_pose().rotation;
      EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-9);
    }
  }
}

GraspCandidate make_candidate(const Vec3& pos, double yaw, double quality) {
  GraspCandidate g;
  g.position = pos;
  g.approach = Vec3(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 side(-std::sin(yaw), std::cos(yaw), 0.0);
  g.contact_a = pos - 0.03 * side;
  g.contact_b = pos + 0.03 * side;
  g.width = 0.06;
  g.quality = quality;
  return g;
}

/// Independent argmax over the discrete pose grid.
std::tuple<std::size_t, int, int> brute_force(const std::vector<GraspCandidate>& cands, const OccupancyGrid& occ,
                                              const RobotModel& robot, const ScoreWeights& w, const PoseGrid& pg) {
  std::tuple<std::size_t, int, int> best{cands.size(), -1, -1};
  double best_score = -1e300;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    for (int i = 0; i < pg.radii; ++i) {
      const double r = robot.reach * (pg.min_frac + (pg.radii == 1 ? 0.0 : (pg.max_frac - pg.min_frac) * i / (pg.radii - 1)));
      for (int j = 0; j < pg.headings; ++j) {
        const double phi = 2.0 * kPi * j / pg.headings;
        const Vec2 body = cands[c].position.head<2>() + r * Vec2(std::cos(phi), std::sin(phi));
        const auto cell = occ.cell_of(body);
        if (!cell || occ.occupied(*cell)) continue;
        const Vec3 shoulder(body.x(), body.y(), occ.floor_height() + robot.shoulder_height);
        if ((cands[c].position - shoulder).norm() > robot.reach) continue;
        const double heading = phi + kPi;
        const double yaw = std::atan2(cands[c].approach.y(), cands[c].approach.x());
        const double score = w.quality * cands[c].quality + w.alignment * 0.5 * (1.0 + std::cos(heading - yaw)) +
                             w.clearance * occ.clearance_at(body) / occ.clearance_cap();
        if (score > best_score + 1e-12 * std::max(1.0, std::abs(best_score))) {
          best_score = score;
          best = {c, i, j};
        }
      }
    }
  }
  return best;
}

TEST(JointOptimize, SingleCandidateFacesApproach) {
  const OccupancyGrid g = open_grid(-3.0, -3.0, 120, 120);
  for (int k = 0; k < 8; ++k) {
    const double yaw = 2.0 * kPi * k / 8.0;
    const BodyGraspPlan plan = joint_optimize({make_candidate({0.0, 0.0, 0.4}, yaw, 0.7)}, g, RobotModel{});
    EXPECT_NEAR(alignment_score(plan.body_pose.theta, yaw), 1.0, 1e-12);
    EXPECT_EQ(plan.radius_index, 0);
  }
}

TEST(JointOptimize, PrefersUnblockedApproach) {
  OccupancyGrid g = open_grid(-3.0, -3.0, 120, 120);
  block_rect(g, {-3.0, -3.0}, {-0.2, 3.0});  // wall filling the -x side
  g.inflate(0.1);
  // Candidate 0 must be approached from -x (body at -x); candidate 1 from +x.
  const std::vector<GraspCandidate> cands{make_candidate({0.3, 0.0, 0.4}, 0.0, 0.8),
                                          make_candidate({0.3, 0.0, 0.4}, kPi, 0.8)};
  const BodyGraspPlan plan = joint_optimize(cands, g, RobotModel{});
  EXPECT_EQ(plan.candidate, 1u);
  const auto [c, i, j] = brute_force(cands, g, RobotModel{}, ScoreWeights{}, PoseGrid{});
  EXPECT_EQ(plan.candidate, c);
  EXPECT_EQ(plan.radius_index, i);
  EXPECT_EQ(plan.heading_index, j);
}

TEST(JointOptimize, SurroundedObjectHasNoPose) {
  OccupancyGrid g = open_grid(-3.0, -3.0, 120, 120);
  block_rect(g, {-3.0, -3.0}, {3.0, 3.0});
  EXPECT_EQ(kind_of([&] { joint_optimize({make_candidate({0, 0, 0.4}, 0.0, 0.5)}, g, RobotModel{}); }),
            ErrorKind::no_feasible_pose);
  EXPECT_THROW(joint_optimize({}, g, RobotModel{}), Error);
}

TEST(JointOptimize, MatchesBruteForceAndIgnoresWeightScale) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 30; ++inst) {
    OccupancyGrid g = open_grid(-2.0, -2.0, 80, 80);
    for (int b = 0; b < 6; ++b) {
      const Vec2 lo(-2.0 + 4.0 * u(rng), -2.0 + 4.0 * u(rng));
      block_rect(g, lo, lo + Vec2(0.2 + 0.6 * u(rng), 0.2 + 0.6 * u(rng)));
    }
    g.inflate(0.1);
    std::vector<GraspCandidate> cands;
    for (int c = 0; c < 4; ++c) {
      cands.push_back(make_candidate({0.4 * (u(rng) - 0.5), 0.4 * (u(rng) - 0.5), 0.3 * u(rng)}, 2 * kPi * u(rng),
                                     std::round(u(rng) * 4.0) / 4.0));
    }
    PoseGrid pg;
    pg.headings = 12;
    pg.radii = 3;
    const ScoreWeights w{u(rng), u(rng), u(rng)};
    const auto expect = brute_force(cands, g, RobotModel{}, w, pg);
    if (std::get<1>(expect) < 0) {
      EXPECT_THROW(joint_optimize(cands, g, RobotModel{}, w, pg), Error);
      continue;
    }
    const BodyGraspPlan plan = joint_optimize(cands, g, RobotModel{}, w, pg);
    EXPECT_EQ(std::make_tuple(plan.candidate, plan.radius_index, plan.heading_index), expect) << inst;
    const ScoreWeights scaled{3.7 * w.quality, 3.7 * w.alignment, 3.7 * w.clearance};
    const BodyGraspPlan again = joint_optimize(cands, g, RobotModel{}, scaled, pg);
    EXPECT_EQ(again.candidate, plan.candidate);
    EXPECT_EQ(again.radius_index, plan.radius_index);
    EXPECT_EQ(again.heading_index, plan.heading_index);
  }
}

Workspace square_workspace(double lo, double hi) {
  return Workspace{{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}, 0.0, 1.0};
}

TEST(OptimizeDrop, OpenFloorUsesSmallestStandoff) {
  const OccupancyGrid g = open_grid(-3.0, -3.0, 120, 120);
  const DropPlan d = optimize_drop({0.0, 0.0, 0.0}, g, square_workspace(-3, 3), RobotModel{});
  EXPECT_EQ(d.radius_index, 0);
  EXPECT_NEAR(d.body_pose.position().norm(), 0.4, 1e-12);
  const double facing = std::atan2(-d.body_pose.y, -d.body_pose.x);
  EXPECT_NEAR(wrap_angle(d.body_pose.theta - facing), 0.0, 1e-12);
  EXPECT_NEAR(d.release.z(), 0.05, 1e-12);
}

TEST(OptimizeDrop, WallSideIsAvoided) {
  OccupancyGrid g = open_grid(-3.0, -3.0, 120, 120);
  block_rect(g, {0.3, -3.0}, {0.5, 3.0});  // wall just +x of the drop
  g.inflate(0.4);
  const DropPlan d = optimize_drop({0.0, 0.0, 0.0}, g, square_workspace(-3, 3), RobotModel{});
  EXPECT_LT(d.body_pose.x, 0.0);
  // Oracle: exhaustive scoring over the same grid.
  double best = -1.0;
  Vec2 best_body;
  const PoseGrid pg;
  for (int i = 0; i < pg.radii; ++i) {
    for (int j = 0; j < pg.headings; ++j) {
      const Pose2 p = grid_pose(pg, RobotModel{}, {0, 0}, i, j);
      if (g.occupied_at(p.position())) continue;
      const double s = 0.25 + 0.25 * g.clearance_at(p.position()) / g.clearance_cap();
      if (s > best + 1e-12) {
        best = s;
        best_body = p.position();
      }
    }
  }
  EXPECT_EQ(d.body_pose.position(), best_body);
}

class SceneFeasibility : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SceneSpec spec = default_scene_spec();
    spec.density = 3000;
    scene_ = new GeneratedScene(generate_scene(spec));
    grid_ = new OccupancyGrid(build_occupancy_grid(scene_->ground_truth.static_cloud, 0.0, 0.05, 1.0, 0.05, 0.4));
  }
  static void TearDownTestSuite() {
    delete scene_;
    delete grid_;
  }
  static GeneratedScene* scene_;
  static OccupancyGrid* grid_;
};

GeneratedScene* SceneFeasibility::scene_ = nullptr;
OccupancyGrid* SceneFeasibility::grid_ = nullptr;

TEST_F(SceneFeasibility, OperationalAreaVerdicts) {
  const Workspace& ws = scene_->ground_truth.workspace;
  const Pose2 start = scene_->ground_truth.robot_start;
  EXPECT_EQ(check_operational_area({start.x, start.y, 0.0}, ws, *grid_), Verdict::ok);
  EXPECT_EQ(check_operational_area({6.0, 2.0, 0.0}, ws, *grid_), Verdict::outside_area);
  EXPECT_EQ(check_operational_area({2.5, 2.0, 1.5}, ws, *grid_), Verdict::unreachable_height);
  // Shelf: 0.8 m top centered at (0.45, 3.6).
  EXPECT_EQ(check_operational_area({0.3, 3.5, 0.83}, ws, *grid_), Verdict::ok);
  EXPECT_EQ(check_operational_area({0.3, 3.5, 0.4}, ws, *grid_), Verdict::inside_obstacle);
  // Wall at x = 5 lies outside the inset polygon; y = 4 likewise. Cabinet body:
  EXPECT_EQ(check_operational_area({4.3, 1.5, 0.2}, ws, *grid_), Verdict::inside_obstacle);
}

TEST_F(SceneFeasibility, ShrinkingWorkspaceNeverAddsOk) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-0.5, 5.5);
  std::uniform_real_distribution<double> uz(-0.1, 1.2);
  Workspace small = scene_->ground_truth.workspace;
  for (auto& v : small.polygon) v = Vec2(2.5, 2.0) + 0.5 * (v - Vec2(2.5, 2.0));
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p(ux(rng), ux(rng) * 0.8, uz(rng));
    const Verdict big = check_operational_area(p, scene_->ground_truth.workspace, *grid_);
    const Verdict little = check_operational_area(p, small, *grid_);
    if (big == Verdict::outside_area) {
      EXPECT_EQ(little, Verdict::outside_area);
    }
  }
}

TEST_F(SceneFeasibility, DropInsideShelfIsInfeasible) {
  EXPECT_EQ(kind_of([&] { optimize_drop({0.7, 3.7, 0.4}, *grid_, scene_->ground_truth.workspace, RobotModel{}); }),
            ErrorKind::no_feasible_pose);
  const DropPlan d = optimize_drop({0.45, 3.5, 0.8}, *grid_, scene_->ground_truth.workspace, RobotModel{}, {}, {},
                                   0.05, Vec2(2.5, 2.0));
  EXPECT_LT(d.body_pose.y, 3.35);
}

TEST_F(SceneFeasibility, DefaultObjectsHaveGraspPlans) {
  const RobotModel robot;
  const Vec2 start = scene_->ground_truth.robot_start.position();
  for (const auto& obj : scene_->ground_truth.objects) {
    const auto cands = generate_grasp_candidates(obj.cloud, Gripper{}, 8, 1);
    const BodyGraspPlan plan = joint_optimize(cands, *grid_, robot, {}, {}, start);
    const RrtPath path = rrt_plan(*grid_, start, plan.body_pose.position());
    EXPECT_TRUE(path_valid(*grid_, path.waypoints)) << obj.label;
    EXPECT_LE((plan.grasp.position - Vec3(plan.body_pose.x, plan.body_pose.y, robot.shoulder_height)).norm(),
              robot.reach);
  }
}

}  // namespace
}  // namespace dollhouse
