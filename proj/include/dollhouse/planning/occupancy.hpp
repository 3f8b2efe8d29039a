#pragma once

#include <optional>
#include <vector>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell&) const = default;
};

/// 2D floor grid. Cell (i, j) covers [origin + (i, j) * res, origin + (i+1, j+1) * res).
/// Keeps raw occupancy, the inflated copy used for planning, the vertical
/// extent of static points per column, and a clearance field over the
/// inflated cells. Anything outside the grid counts as occupied.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Vec2& origin, double resolution, int width, int height, double floor_height = 0.0);

  const Vec2& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double floor_height() const { return floor_height_; }
  double inflation_radius() const { return inflation_radius_; }
  bool empty_band() const { return empty_band_; }

  bool in_bounds(const Cell& c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  /// Cell containing p; nullopt outside the grid.
  std::optional<Cell> cell_of(const Vec2& p) const;
  Vec2 center_of(const Cell& c) const;

  bool raw_occupied(const Cell& c) const { return in_bounds(c) && raw_[index(c)] != 0; }
  bool occupied(const Cell& c) const { return !in_bounds(c) || inflated_[index(c)] != 0; }
  bool occupied_at(const Vec2& p) const;

  std::size_t raw_count() const;
  std::size_t occupied_count() const;

  /// Absolute z range of the static points above the band floor in this column.
  std::optional<std::pair<double, double>> column(const Cell& c) const;

  /// Distance from p's cell center to the nearest inflated cell center (or to
  /// the grid border), capped at clearance_cap().
  double clearance_at(const Vec2& p) const;
  double clearance_cap() const { return clearance_cap_; }

  /// Builder steps; build_occupancy_grid is the usual entry point.
  void mark(const Cell& c);
  void add_to_column(const Cell& c, double z);
  /// Replaces the inflated layer with the raw layer dilated by a Euclidean
  /// disc of ceil(radius / resolution) cells, and refreshes clearance.
  void inflate(double radius, double clearance_cap = 0.5);
  void set_empty_band(bool empty) { empty_band_ = empty; }

  /// 8-connected free-cell labels (-1 for occupied), for reachability tests.
  std::vector<int> free_components() const;
  int component_at(const std::vector<int>& labels, const Vec2& p) const;

 private:
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }
  void refresh_clearance();

  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 0.05;
  int width_ = 0;
  int height_ = 0;
  double floor_height_ = 0.0;
  double inflation_radius_ = 0.0;
  double clearance_cap_ = 0.5;
  bool empty_band_ = false;
  std::vector<char> raw_;
  std::vector<char> inflated_;
  std::vector<float> col_min_;
  std::vector<float> col_max_;
  std::vector<float> clearance_;
};

/// Bounds cover the x/y extent of the whole cloud plus `padding` (at least
/// inflation + one cell). A cell is occupied iff a point with height above
/// the floor in [z_min, z_max] falls into it. An empty band yields an
/// all-free grid with empty_band() set.
/// Throws invalid_argument (resolution <= 0, z_min >= z_max, negative
/// inflation) and empty_cloud.
OccupancyGrid build_occupancy_grid(const PointCloud& static_cloud, double floor_height, double z_min, double z_max,
                                   double resolution, double inflation, double padding = 0.5);

}  // namespace dollhouse
