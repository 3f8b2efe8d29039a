#include "dollhouse/planning/grasp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "dollhouse/error.hpp"
#include "dollhouse/scene/kdtree.hpp"

namespace dollhouse {
namespace {

Vec3 view_direction(int k, int n) {
  const double a = 2.0 * std::numbers::pi * k / n;
  return {std::cos(a), std::sin(a), 0.0};
}

bool collinear(const std::vector<Vec3>& pts) {
  const Vec3 c = centroid(pts);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  const Vec3 ev = Eigen::SelfAdjointEigenSolver<Mat3>(cov, Eigen::EigenvaluesOnly).eigenvalues();
  return ev(2) <= 1e-18 || ev(1) <= 1e-10 * ev(2);
}

}  // namespace

double GraspCandidate::approach_yaw() const { return std::atan2(approach.y(), approach.x()); }

RigidTransform GraspCandidate::approach_pose() const {
  const Vec3 x = approach.normalized();
  Vec3 y = closing_axis() - closing_axis().dot(x) * x;
  if (y.norm() < 1e-9) y = Vec3::UnitZ().cross(x);
  if (y.norm() < 1e-9) y = Vec3::UnitY();
  y.normalize();
  RigidTransform t;
  t.rotation.col(0) = x;
  t.rotation.col(1) = y;
  t.rotation.col(2) = x.cross(y);
  t.translation = position;
  return t;
}

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, std::size_t k) {
  const KdTree tree(points);
  const Vec3 c = centroid(points);
  std::vector<Vec3> normals(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nb = tree.knn(points[i], k);
    Vec3 m = Vec3::Zero();
    for (const auto& n : nb) m += points[n.index];
    m /= static_cast<double>(nb.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& n : nb) cov += (points[n.index] - m) * (points[n.index] - m).transpose();
    Vec3 normal = Eigen::SelfAdjointEigenSolver<Mat3>(cov).eigenvectors().col(0).normalized();
    if (normal.dot(points[i] - c) < 0.0) normal = -normal;
    normals[i] = normal;
  }
  return normals;
}

bool is_antipodal(const Vec3& a, const Vec3& na, const Vec3& b, const Vec3& nb, const Gripper& gripper,
                  double friction_cone) {
  const Vec3 d = b - a;
  const double w = d.norm();
  if (w <= 0.0 || w > gripper.max_width) return false;
  const Vec3 u = d / w;
  const double c = std::cos(friction_cone);
  return -na.dot(u) >= c && nb.dot(u) >= c;
}

std::vector<GraspCandidate> generate_grasp_candidates(const PointCloud& object, const Gripper& gripper,
                                                      int n_rotations, std::uint64_t seed,
                                                      const GraspParams& params) {
  if (n_rotations < 1) throw Error(ErrorKind::invalid_argument, "n_rotations must be >= 1");
  if (!(gripper.max_width > 0.0)) throw Error(ErrorKind::invalid_argument, "gripper width must be > 0");
  const auto& pts = object.points;
  if (pts.size() < 20 || collinear(pts)) {
    throw Error(ErrorKind::insufficient_points, "object cloud too small or degenerate for grasping");
  }

  const std::vector<Vec3> normals = estimate_normals(pts, params.normal_neighbors);
  const KdTree tree(pts);
  const Vec3 c = centroid(pts);
  const double diag = std::max(Aabb::from_points(pts).extent().norm(), 1e-9);
  const double cos_cone = std::cos(params.friction_cone);
  const double view_tol = std::sin(std::min(std::numbers::pi / n_rotations, std::numbers::pi / 2));

  std::vector<std::size_t> anchors(pts.size());
  std::iota(anchors.begin(), anchors.end(), 0);
  if (anchors.size() > params.max_anchors) {
    std::mt19937_64 rng(seed);
    std::shuffle(anchors.begin(), anchors.end(), rng);
    anchors.resize(params.max_anchors);
    std::sort(anchors.begin(), anchors.end());
  }

  std::map<std::pair<std::size_t, std::size_t>, GraspCandidate> merged;
  for (auto i : anchors) {
    // Best partner for this anchor, over every view it is usable from.
    bool found = false;
    GraspCandidate best;
    std::size_t best_j = 0;
    for (auto j : tree.radius_search(pts[i], gripper.max_width)) {
      const Vec3 d = pts[j] - pts[i];
      const double w = d.norm();
      if (w < params.min_width || w > gripper.max_width) continue;
      const Vec3 u = d / w;
      const double ca = -normals[i].dot(u);
      const double cb = normals[j].dot(u);
      if (ca < cos_cone || cb < cos_cone) continue;
      int view = -1;
      double view_dot = 2.0;
      for (int k = 0; k < n_rotations; ++k) {
        const double dot = std::abs(u.dot(view_direction(k, n_rotations)));
        if (dot <= view_tol && dot < view_dot - 1e-12) {
          view = k;
          view_dot = dot;
        }
      }
      if (view < 0) continue;
      GraspCandidate g;
      g.contact_a = pts[i];
      g.contact_b = pts[j];
      g.position = 0.5 * (pts[i] + pts[j]);
      g.width = w;
      g.antipodality = cos_cone < 1.0 ? (std::min(ca, cb) - cos_cone) / (1.0 - cos_cone) : 1.0;
      const double centered = std::max(0.0, 1.0 - (g.position - c).norm() / diag);
      g.quality = std::clamp(params.weight_antipodal * g.antipodality + params.weight_center * centered, 0.0, 1.0);
      g.rotation = view;
      g.approach = view_direction(view, n_rotations);
      if (!found || g.quality > best.quality) {
        best = g;
        best_j = j;
        found = true;
      }
    }
    if (!found) continue;
    const auto key = std::minmax(i, best_j);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, best);
    } else if (best.quality > it->second.quality) {
      it->second = best;
    }
  }
  if (merged.empty()) throw Error(ErrorKind::no_grasp_found, "no antipodal pair fits the gripper");

  std::vector<std::pair<std::pair<std::size_t, std::size_t>, GraspCandidate>> ranked(merged.begin(), merged.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second.quality > b.second.quality; });
  std::vector<GraspCandidate> out;
  for (std::size_t k = 0; k < ranked.size() && k < params.max_candidates; ++k) out.push_back(ranked[k].second);
  return out;
}

}  // namespace dollhouse
