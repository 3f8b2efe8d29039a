#include "dollhouse/scene/voxel.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "dollhouse/error.hpp"

namespace dollhouse {
namespace {

struct KeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

void check_voxel(double voxel) {
  if (!(voxel > 0.0)) throw Error(ErrorKind::non_positive_voxel, "voxel edge must be > 0");
}

/// Voxel slot per point, slots numbered by first occurrence.
std::vector<std::size_t> assign_slots(const std::vector<Vec3>& points, double voxel, std::size_t& slot_count) {
  std::unordered_map<VoxelKey, std::size_t, KeyHash> slots;
  slots.reserve(points.size());
  std::vector<std::size_t> slot_of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [it, inserted] = slots.try_emplace(voxel_key(points[i], voxel), slots.size());
    slot_of[i] = it->second;
  }
  slot_count = slots.size();
  return slot_of;
}

}  // namespace

VoxelKey voxel_key(const Vec3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  check_voxel(voxel);
  std::size_t n_slots = 0;
  const auto slot_of = assign_slots(cloud.points, voxel, n_slots);

  std::vector<Vec3> sums(n_slots, Vec3::Zero());
  std::vector<std::size_t> counts(n_slots, 0);
  std::vector<std::map<int, std::size_t>> votes(cloud.has_labels() ? n_slots : 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    sums[slot_of[i]] += cloud.points[i];
    ++counts[slot_of[i]];
    if (cloud.has_labels()) ++votes[slot_of[i]][cloud.labels[i]];
  }

  PointCloud out;
  out.points.reserve(n_slots);
  for (std::size_t s = 0; s < n_slots; ++s) out.points.push_back(sums[s] / static_cast<double>(counts[s]));
  if (cloud.has_labels()) {
    out.labels.reserve(n_slots);
    for (const auto& v : votes) {
      int best = 0;
      std::size_t best_count = 0;
      for (const auto& [label, count] : v) {  // ascending label, strict > keeps the lowest on ties
        if (count > best_count) {
          best = label;
          best_count = count;
        }
      }
      out.labels.push_back(best);
    }
  }
  return out;
}

std::vector<std::size_t> voxel_subsample_indices(const std::vector<Vec3>& points, double voxel) {
  check_voxel(voxel);
  std::size_t n_slots = 0;
  const auto slot_of = assign_slots(points, voxel, n_slots);
  std::vector<Vec3> sums(n_slots, Vec3::Zero());
  std::vector<std::size_t> counts(n_slots, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sums[slot_of[i]] += points[i];
    ++counts[slot_of[i]];
  }
  std::vector<std::size_t> best(n_slots, std::numeric_limits<std::size_t>::max());
  std::vector<double> best_d2(n_slots, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto s = slot_of[i];
    const double d2 = (points[i] - sums[s] / static_cast<double>(counts[s])).squaredNorm();
    if (d2 < best_d2[s]) {
      best_d2[s] = d2;
      best[s] = i;
    }
  }
  return best;
}

std::vector<std::size_t> subsample_to_budget(const std::vector<Vec3>& points, std::size_t max_points) {
  if (points.size() <= max_points || max_points == 0) {
    std::vector<std::size_t> all(points.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  const Aabb box = Aabb::from_points(points);
  const Vec3 ext = box.extent().cwiseMax(1e-9);
  // Surface-like clouds: start from the edge that would spread max_points over the box faces.
  const double area = 2.0 * (ext.x() * ext.y() + ext.y() * ext.z() + ext.x() * ext.z());
  double voxel = std::max(std::sqrt(area / static_cast<double>(max_points)) * 0.5, 1e-6);
  while (true) {
    auto idx = voxel_subsample_indices(points, voxel);
    if (idx.size() <= max_points) return idx;
    voxel *= 1.15;
  }
}

}  // namespace dollhouse
