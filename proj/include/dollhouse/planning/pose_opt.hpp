#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dollhouse/planning/grasp.hpp"
#include "dollhouse/planning/occupancy.hpp"
#include "dollhouse/scene/bundle.hpp"

namespace dollhouse {

struct RobotModel {
  double reach = 1.0;          // shoulder to gripper (m)
  double body_radius = 0.35;
  double shoulder_height = 0.5;  // above the floor
};

struct ScoreWeights {
  double quality = 0.5;
  double alignment = 0.25;
  double clearance = 0.25;
};

/// Body poses sit on circles around the target: `headings` evenly spaced
/// bearings, `radii` standoffs spread over [min_frac, max_frac] * reach.
struct PoseGrid {
  int headings = 24;
  int radii = 4;
  double min_frac = 0.4;
  double max_frac = 0.9;
};

struct BodyGraspPlan {
  Pose2 body_pose;
  GraspCandidate grasp;
  std::size_t candidate = 0;
  int radius_index = 0;
  int heading_index = 0;
  double joint_score = 0.0;
  std::vector<Vec2> path_to_object;
  std::vector<Vec2> path_to_drop;
};

/// Standoff radius for index i of the grid.
double standoff_radius(const PoseGrid& grid, const RobotModel& robot, int i);

/// Body position at (radius i, bearing j) around `target`, facing the target.
Pose2 grid_pose(const PoseGrid& grid, const RobotModel& robot, const Vec2& target, int i, int j);

/// (1 + cos(heading - approach_yaw)) / 2.
double alignment_score(double heading, double approach_yaw);

/// Clearance at the body center over the inflated grid, divided by its cap.
double clearance_score(const OccupancyGrid& grid, const Vec2& body);

/// Free body cell, reachable component (when `from` is given) and a 3D reach
/// from the shoulder to `target`.
bool pose_feasible(const OccupancyGrid& occupancy, const RobotModel& robot, const Pose2& pose, const Vec3& target,
                   const std::vector<int>* components, int from_component);

/// True when `candidate` beats `incumbent` by more than rounding noise.
bool better_score(double candidate, double incumbent);

/// Exhaustive search over candidates x radii x bearings, each grid centered on
/// the candidate's grasp position. Ties go to the lowest candidate index,
/// then smallest radius, then lowest bearing index. With `from`, body poses
/// must share its free component. Throws no_feasible_pose, invalid_argument.
BodyGraspPlan joint_optimize(const std::vector<GraspCandidate>& candidates, const OccupancyGrid& occupancy,
                             const RobotModel& robot, const ScoreWeights& weights = {}, const PoseGrid& grid = {},
                             std::optional<Vec2> from = std::nullopt);

struct DropPlan {
  Pose2 body_pose;
  Vec3 release = Vec3::Zero();
  int radius_index = 0;
  int heading_index = 0;
  double score = 0.0;
};

enum class Verdict { ok, outside_area, unreachable_height, inside_obstacle };

std::string_view to_string(Verdict v);

/// Same search around the drop point with the grasp term dropped. The release
/// point is the drop point raised by `release_clearance`.
/// Throws no_feasible_pose (also when the drop point is inside an obstacle).
DropPlan optimize_drop(const Vec3& drop_point, const OccupancyGrid& occupancy, const Workspace& workspace,
                       const RobotModel& robot, const ScoreWeights& weights = {}, const PoseGrid& grid = {},
                       double release_clearance = 0.05, std::optional<Vec2> from = std::nullopt);

/// Checks the workspace polygon, the reachable height band (relative to the
/// grid floor), then static occupancy. A point counts as resting on a
/// support when it is at most `support_tol` below the top of an occupied
/// column.
Verdict check_operational_area(const Vec3& point, const Workspace& workspace, const OccupancyGrid& occupancy,
                               double support_tol = 0.03);

}  // namespace dollhouse
