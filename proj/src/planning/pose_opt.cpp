#include "dollhouse/planning/pose_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

void check_grid(const PoseGrid& grid, const RobotModel& robot) {
  if (grid.headings < 1 || grid.radii < 1 || !(grid.min_frac > 0.0) || grid.min_frac > grid.max_frac ||
      !(robot.reach > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "invalid pose grid or robot model");
  }
}

}  // namespace

double standoff_radius(const PoseGrid& grid, const RobotModel& robot, int i) {
  if (grid.radii == 1) return grid.min_frac * robot.reach;
  const double t = static_cast<double>(i) / (grid.radii - 1);
  return robot.reach * (grid.min_frac + t * (grid.max_frac - grid.min_frac));
}

Pose2 grid_pose(const PoseGrid& grid, const RobotModel& robot, const Vec2& target, int i, int j) {
  const double bearing = 2.0 * std::numbers::pi * j / grid.headings;
  const double r = standoff_radius(grid, robot, i);
  return {target.x() + r * std::cos(bearing), target.y() + r * std::sin(bearing), wrap_angle(bearing + std::numbers::pi)};
}

double alignment_score(double heading, double approach_yaw) { return 0.5 * (1.0 + std::cos(heading - approach_yaw)); }

double clearance_score(const OccupancyGrid& grid, const Vec2& body) {
  return grid.clearance_at(body) / grid.clearance_cap();
}

bool pose_feasible(const OccupancyGrid& occupancy, const RobotModel& robot, const Pose2& pose, const Vec3& target,
                   const std::vector<int>* components, int from_component) {
  const Vec2 body = pose.position();
  if (occupancy.occupied_at(body)) return false;
  if (components && occupancy.component_at(*components, body) != from_component) return false;
  const Vec3 shoulder(body.x(), body.y(), occupancy.floor_height() + robot.shoulder_height);
  return (target - shoulder).norm() <= robot.reach;
}

bool better_score(double candidate, double incumbent) {
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

BodyGraspPlan joint_optimize(const std::vector<GraspCandidate>& candidates, const OccupancyGrid& occupancy,
                             const RobotModel& robot, const ScoreWeights& weights, const PoseGrid& grid,
                             std::optional<Vec2> from) {
  check_grid(grid, robot);
  if (candidates.empty()) throw Error(ErrorKind::invalid_argument, "joint_optimize needs at least one candidate");
  std::vector<int> components;
  int from_component = -1;
  if (from) {
    components = occupancy.free_components();
    from_component = occupancy.component_at(components, *from);
  }
  const std::vector<int>* comp = from ? &components : nullptr;

  bool found = false;
  BodyGraspPlan best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const GraspCandidate& g = candidates[c];
    const Vec2 target = g.position.head<2>();
    for (int i = 0; i < grid.radii; ++i) {
      for (int j = 0; j < grid.headings; ++j) {
        const Pose2 pose = grid_pose(grid, robot, target, i, j);
        if (!pose_feasible(occupancy, robot, pose, g.position, comp, from_component)) continue;
        const double score = weights.quality * g.quality +
                             weights.alignment * alignment_score(pose.theta, g.approach_yaw()) +
                             weights.clearance * clearance_score(occupancy, pose.position());
        if (!found || better_score(score, best.joint_score)) {
          found = true;
          best.body_pose = pose;
          best.grasp = g;
          best.candidate = c;
          best.radius_index = i;
          best.heading_index = j;
          best.joint_score = score;
        }
      }
    }
  }
  if (!found) throw Error(ErrorKind::no_feasible_pose, "no collision-free body pose reaches any grasp");
  return best;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::outside_area: return "outside_area";
    case Verdict::unreachable_height: return "unreachable_height";
    case Verdict::inside_obstacle: return "inside_obstacle";
  }
  return "unknown";
}

DropPlan optimize_drop(const Vec3& drop_point, const OccupancyGrid& occupancy, const Workspace& workspace,
                       const RobotModel& robot, const ScoreWeights& weights, const PoseGrid& grid,
                       double release_clearance, std::optional<Vec2> from) {
  check_grid(grid, robot);
  const Verdict v = check_operational_area(drop_point, workspace, occupancy);
  if (v != Verdict::ok) {
    throw Error(ErrorKind::no_feasible_pose, "drop point rejected: " + std::string(to_string(v)));
  }
  std::vector<int> components;
  int from_component = -1;
  if (from) {
    components = occupancy.free_components();
    from_component = occupancy.component_at(components, *from);
  }
  const std::vector<int>* comp = from ? &components : nullptr;

  const Vec3 release = drop_point + Vec3(0.0, 0.0, release_clearance);
  bool found = false;
  DropPlan best;
  for (int i = 0; i < grid.radii; ++i) {
    for (int j = 0; j < grid.headings; ++j) {
      const Pose2 pose = grid_pose(grid, robot, drop_point.head<2>(), i, j);
      if (!pose_feasible(occupancy, robot, pose, release, comp, from_component)) continue;
      // The body always faces the drop point, so alignment is 1.
      const double score = weights.alignment + weights.clearance * clearance_score(occupancy, pose.position());
      if (!found || better_score(score, best.score)) {
        found = true;
        best = DropPlan{pose, release, i, j, score};
      }
    }
  }
  if (!found) throw Error(ErrorKind::no_feasible_pose, "no collision-free body pose reaches the drop point");
  return best;
}

Verdict check_operational_area(const Vec3& point, const Workspace& workspace, const OccupancyGrid& occupancy,
                               double support_tol) {
  if (!workspace.contains_xy(point.head<2>())) return Verdict::outside_area;
  const double h = point.z() - occupancy.floor_height();
  if (h < workspace.z_min - support_tol || h > workspace.z_max) return Verdict::unreachable_height;
  const auto cell = occupancy.cell_of(point.head<2>());
  if (cell && occupancy.raw_occupied(*cell)) {
    const auto col = occupancy.column(*cell);
    if (col && point.z() < col->second - support_tol) return Verdict::inside_obstacle;
  }
  return Verdict::ok;
}

}  // namespace dollhouse
