#include "dollhouse/planning/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dollhouse/error.hpp"

namespace dollhouse {

OccupancyGrid::OccupancyGrid(const Vec2& origin, double resolution, int width, int height, double floor_height)
    : origin_(origin), resolution_(resolution), width_(width), height_(height), floor_height_(floor_height) {
  if (!(resolution > 0.0)) throw Error(ErrorKind::invalid_argument, "grid resolution must be > 0");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::invalid_argument, "grid must have cells");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  raw_.assign(n, 0);
  inflated_.assign(n, 0);
  col_min_.assign(n, std::numeric_limits<float>::infinity());
  col_max_.assign(n, -std::numeric_limits<float>::infinity());
  refresh_clearance();
}

std::optional<Cell> OccupancyGrid::cell_of(const Vec2& p) const {
  const double fx = std::floor((p.x() - origin_.x()) / resolution_);
  const double fy = std::floor((p.y() - origin_.y()) / resolution_);
  if (fx < 0.0 || fy < 0.0 || fx >= width_ || fy >= height_) return std::nullopt;
  return Cell{static_cast<int>(fx), static_cast<int>(fy)};
}

Vec2 OccupancyGrid::center_of(const Cell& c) const {
  return origin_ + Vec2((c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_);
}

bool OccupancyGrid::occupied_at(const Vec2& p) const {
  const auto c = cell_of(p);
  return !c || occupied(*c);
}

std::size_t OccupancyGrid::raw_count() const {
  return static_cast<std::size_t>(std::count(raw_.begin(), raw_.end(), 1));
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(inflated_.begin(), inflated_.end(), 1));
}

std::optional<std::pair<double, double>> OccupancyGrid::column(const Cell& c) const {
  if (!in_bounds(c)) return std::nullopt;
  const std::size_t i = index(c);
  if (col_min_[i] > col_max_[i]) return std::nullopt;
  return std::make_pair(static_cast<double>(col_min_[i]), static_cast<double>(col_max_[i]));
}

double OccupancyGrid::clearance_at(const Vec2& p) const {
  const auto c = cell_of(p);
  if (!c) return 0.0;
  return clearance_[index(*c)];
}

void OccupancyGrid::mark(const Cell& c) {
  if (!in_bounds(c)) return;
  raw_[index(c)] = 1;
  inflated_[index(c)] = 1;
}

void OccupancyGrid::add_to_column(const Cell& c, double z) {
  if (!in_bounds(c)) return;
  const std::size_t i = index(c);
  col_min_[i] = std::min(col_min_[i], static_cast<float>(z));
  col_max_[i] = std::max(col_max_[i], static_cast<float>(z));
}

void OccupancyGrid::inflate(double radius, double clearance_cap) {
  if (radius < 0.0) throw Error(ErrorKind::invalid_argument, "inflation radius must be >= 0");
  inflation_radius_ = radius;
  clearance_cap_ = clearance_cap;
  const int k = static_cast<int>(std::ceil(radius / resolution_ - 1e-9));
  inflated_ = raw_;
  if (k > 0) {
    std::vector<Cell> disc;
    for (int dy = -k; dy <= k; ++dy) {
      for (int dx = -k; dx <= k; ++dx) {
        if (dx * dx + dy * dy <= k * k) disc.push_back({dx, dy});
      }
    }
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        if (!raw_[index({x, y})]) continue;
        for (const auto& d : disc) {
          const Cell n{x + d.x, y + d.y};
          if (in_bounds(n)) inflated_[index(n)] = 1;
        }
      }
    }
  }
  refresh_clearance();
}

void OccupancyGrid::refresh_clearance() {
  clearance_.assign(inflated_.size(), static_cast<float>(clearance_cap_));
  const int k = static_cast<int>(std::ceil(clearance_cap_ / resolution_));
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      double best = clearance_cap_;
      // The border of the grid behaves as an obstacle one cell outside.
      best = std::min(best, resolution_ * std::min({x + 1, y + 1, width_ - x, height_ - y}));
      for (int dy = -k; dy <= k; ++dy) {
        for (int dx = -k; dx <= k; ++dx) {
          const Cell n{x + dx, y + dy};
          if (!in_bounds(n) || !inflated_[index(n)]) continue;
          best = std::min(best, resolution_ * std::sqrt(static_cast<double>(dx * dx + dy * dy)));
        }
      }
      clearance_[index({x, y})] = static_cast<float>(best);
    }
  }
}

std::vector<int> OccupancyGrid::free_components() const {
  std::vector<int> label(inflated_.size(), -1);
  int next = 0;
  std::vector<Cell> stack;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (inflated_[index({x, y})] || label[index({x, y})] >= 0) continue;
      label[index({x, y})] = next;
      stack.assign(1, Cell{x, y});
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Cell n{c.x + dx, c.y + dy};
            if (!in_bounds(n) || inflated_[index(n)] || label[index(n)] >= 0) continue;
            label[index(n)] = next;
            stack.push_back(n);
          }
        }
      }
      ++next;
    }
  }
  return label;
}

int OccupancyGrid::component_at(const std::vector<int>& labels, const Vec2& p) const {
  const auto c = cell_of(p);
  return c ? labels[index(*c)] : -1;
}

OccupancyGrid build_occupancy_grid(const PointCloud& static_cloud, double floor_height, double z_min, double z_max,
                                   double resolution, double inflation, double padding) {
  if (!(resolution > 0.0)) throw Error(ErrorKind::invalid_argument, "grid resolution must be > 0");
  if (!(z_min < z_max)) throw Error(ErrorKind::invalid_argument, "grid band needs z_min < z_max");
  if (inflation < 0.0) throw Error(ErrorKind::invalid_argument, "inflation must be >= 0");
  const Aabb box = Aabb::from_points(static_cloud.points);
  const double pad = std::max(padding, inflation + resolution);
  const Vec2 origin = box.min.head<2>() - Vec2(pad, pad);
  const Vec2 span = box.extent().head<2>() + Vec2(2 * pad, 2 * pad);
  OccupancyGrid grid(origin, resolution, static_cast<int>(std::ceil(span.x() / resolution)) + 1,
                     static_cast<int>(std::ceil(span.y() / resolution)) + 1, floor_height);
  bool any = false;
  for (const auto& p : static_cloud.points) {
    const double h = p.z() - floor_height;
    if (h < z_min) continue;
    const auto c = grid.cell_of(p.head<2>());
    if (!c) continue;
    grid.add_to_column(*c, p.z());
    if (h <= z_max) {
      grid.mark(*c);
      any = true;
    }
  }
  grid.set_empty_band(!any);
  grid.inflate(inflation);
  return grid;
}

}  // namespace dollhouse
