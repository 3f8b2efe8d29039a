#pragma once

#include <cstdint>
#include <vector>

#include "dollhouse/planning/occupancy.hpp"

namespace dollhouse {

struct RrtParams {
  double step = 0.3;
  double goal_bias = 0.1;
  int max_iterations = 5000;
  double goal_tolerance = 0.05;
  std::uint64_t seed = 1;
};

struct RrtPath {
  std::vector<Vec2> waypoints;  // start first; the last waypoint is the goal itself
  double raw_length = 0.0;      // tree path length before shortcutting
  int iterations = 0;
};

/// True when every grid cell the segment a..b passes through is free.
bool segment_free(const OccupancyGrid& grid, const Vec2& a, const Vec2& b);

double path_length(const std::vector<Vec2>& path);

/// Plain RRT with goal bias and greedy shortcut smoothing.
/// Throws start_blocked, goal_blocked, no_path_found and invalid_argument.
RrtPath rrt_plan(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal, const RrtParams& params = {});

}  // namespace dollhouse
