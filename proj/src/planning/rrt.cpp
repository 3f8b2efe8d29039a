#include "dollhouse/planning/rrt.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

struct Node {
  Vec2 p;
  int parent = -1;
};

std::vector<Vec2> trace(const std::vector<Node>& tree, int leaf) {
  std::vector<Vec2> path;
  for (int i = leaf; i >= 0; i = tree[static_cast<std::size_t>(i)].parent) path.push_back(tree[static_cast<std::size_t>(i)].p);
  return {path.rbegin(), path.rend()};
}

std::vector<Vec2> shortcut(const OccupancyGrid& grid, const std::vector<Vec2>& path) {
  std::vector<Vec2> out{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && !segment_free(grid, path[i], path[j])) --j;
    out.push_back(path[j]);
    i = j;
  }
  return out;
}

}  // namespace

bool segment_free(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
  // Grid traversal in cell units. A segment through a cell corner also
  // tests both cells sharing that corner.
  const Vec2 pa = (a - grid.origin()) / grid.resolution();
  const Vec2 pb = (b - grid.origin()) / grid.resolution();
  int x = static_cast<int>(std::floor(pa.x()));
  int y = static_cast<int>(std::floor(pa.y()));
  const int x1 = static_cast<int>(std::floor(pb.x()));
  const int y1 = static_cast<int>(std::floor(pb.y()));
  auto blocked = [&](int cx, int cy) { return grid.occupied(Cell{cx, cy}); };
  if (blocked(x, y)) return false;

  const Vec2 d = pb - pa;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int sx = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
  const int sy = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
  const double dx = sx != 0 ? 1.0 / std::abs(d.x()) : kInf;
  const double dy = sy != 0 ? 1.0 / std::abs(d.y()) : kInf;
  double tx = sx > 0 ? (x + 1 - pa.x()) * dx : (sx < 0 ? (pa.x() - x) * dx : kInf);
  double ty = sy > 0 ? (y + 1 - pa.y()) * dy : (sy < 0 ? (pa.y() - y) * dy : kInf);
  constexpr double kTie = 1e-12;
  for (int steps = std::abs(x1 - x) + std::abs(y1 - y); (x != x1 || y != y1) && steps >= 0; --steps) {
    if (tx < ty - kTie) {
      x += sx;
      tx += dx;
    } else if (ty < tx - kTie) {
      y += sy;
      ty += dy;
    } else {
      if (blocked(x + sx, y) || blocked(x, y + sy)) return false;
      x += sx;
      y += sy;
      tx += dx;
      ty += dy;
    }
    if (blocked(x, y)) return false;
  }
  return true;
}

double path_length(const std::vector<Vec2>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  return len;
}

RrtPath rrt_plan(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal, const RrtParams& params) {
  if (!(params.step > 0.0) || params.goal_bias < 0.0 || params.goal_bias > 1.0 || params.max_iterations < 1 ||
      params.goal_tolerance < 0.0) {
    throw Error(ErrorKind::invalid_argument, "invalid RRT parameters");
  }
  if (grid.occupied_at(start)) throw Error(ErrorKind::start_blocked, "start lies in an obstacle");
  if (grid.occupied_at(goal)) throw Error(ErrorKind::goal_blocked, "goal lies in an obstacle");

  RrtPath result;
  if (segment_free(grid, start, goal)) {
    result.waypoints = {start, goal};
    result.raw_length = (goal - start).norm();
    return result;
  }
  // A disconnected goal would only burn the iteration budget.
  const auto components = grid.free_components();
  if (grid.component_at(components, start) != grid.component_at(components, goal)) {
    throw Error(ErrorKind::no_path_found, "goal is not connected to start");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> ux(grid.origin().x(), grid.origin().x() + grid.width() * grid.resolution());
  std::uniform_real_distribution<double> uy(grid.origin().y(), grid.origin().y() + grid.height() * grid.resolution());
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<Node> tree{{start, -1}};
  for (int it = 1; it <= params.max_iterations; ++it) {
    result.iterations = it;
    const Vec2 sample = coin(rng) < params.goal_bias ? goal : Vec2(ux(rng), uy(rng));
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const double d = (tree[i].p - sample).squaredNorm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    const Vec2 from = tree[nearest].p;
    const double dist = std::sqrt(best);
    if (dist < 1e-12) continue;
    const Vec2 to = dist <= params.step ? sample : Vec2(from + (sample - from) * (params.step / dist));
    if (!segment_free(grid, from, to)) continue;
    tree.push_back({to, static_cast<int>(nearest)});
    const int leaf = static_cast<int>(tree.size() - 1);
    if ((goal - to).norm() <= params.step && segment_free(grid, to, goal)) {
      int end = leaf;
      if ((goal - to).norm() > 0.0) {
        tree.push_back({goal, leaf});
        end = leaf + 1;
      }
      const auto raw = trace(tree, end);
      result.raw_length = path_length(raw);
      result.waypoints = shortcut(grid, raw);
      return result;
    }
  }
  throw Error(ErrorKind::no_path_found, "RRT iteration budget exhausted");
}

}  // namespace dollhouse
