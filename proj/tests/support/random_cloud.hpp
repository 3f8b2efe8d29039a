#pragma once

#include <random>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse::testing {

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
  return c;
}

inline RigidTransform random_transform(std::mt19937_64& rng, double max_angle = 3.14159, double max_shift = 2.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 axis(g(rng), g(rng), g(rng));
  const Vec3 shift(u(rng), u(rng), u(rng));
  return RigidTransform::from_axis_angle(axis, u(rng) * max_angle, shift * max_shift);
}

/// Samples the surface of an axis-aligned box centered at the origin.
inline PointCloud box_surface(const Vec3& size, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<int> face(0, 5);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p(u(rng) * size.x(), u(rng) * size.y(), u(rng) * size.z());
    const int f = face(rng);
    const int axis = f / 2;
    p[axis] = (f % 2 == 0 ? 0.5 : -0.5) * size[axis];
    c.points.push_back(p);
  }
  return c;
}

}  // namespace dollhouse::testing
