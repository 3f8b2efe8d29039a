#include "dollhouse/segmentation/segmentation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "dollhouse/error.hpp"
#include "dollhouse/scene/kdtree.hpp"

namespace dollhouse {
namespace {

Vec3 orient_up(Vec3 n) {
  if (n.z() < 0.0) return -n;
  if (n.z() == 0.0) {
    if (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)) return -n;
  }
  return n;
}

IndexSet inliers_of(const PointCloud& cloud, const Plane& plane, double thresh) {
  IndexSet out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (std::abs(plane.signed_distance(cloud.points[i])) <= thresh) out.push_back(i);
  }
  return out;
}

/// Least-squares plane through the points: normal is the direction of least spread.
Plane fit_plane(const std::vector<Vec3>& pts) {
  const Vec3 c = centroid(pts);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 n = orient_up(eig.eigenvectors().col(0).normalized());
  return Plane{n, n.dot(c)};
}

double percentile(std::vector<double>& v, double q) {
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

double span(std::vector<double> v) {
  if (v.size() < 2) return 0.0;
  const double lo = percentile(v, 0.01);
  const double hi = percentile(v, 0.99);
  return hi - lo;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

double floor_height_of(const Plane& p) { return p.normal.z() > 1e-9 ? p.offset / p.normal.z() : 0.0; }

}  // namespace

PlaneFit extract_ground_plane(const PointCloud& cloud, double dist_thresh, int iterations, std::uint64_t seed) {
  if (cloud.size() < 3) throw Error(ErrorKind::invalid_argument, "plane fit needs at least 3 points");
  if (!(dist_thresh > 0.0)) throw Error(ErrorKind::invalid_argument, "plane distance threshold must be > 0");
  if (iterations < 1) throw Error(ErrorKind::invalid_argument, "plane fit needs at least one iteration");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
  Plane best;
  std::size_t best_count = 0;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const std::size_t c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Vec3& pa = cloud.points[a];
    const Vec3 n = (cloud.points[b] - pa).cross(cloud.points[c] - pa);
    if (n.norm() < 1e-12) continue;
    const Vec3 nn = orient_up(n.normalized());
    const Plane candidate{nn, nn.dot(pa)};
    std::size_t count = 0;
    for (const auto& p : cloud.points) {
      if (std::abs(candidate.signed_distance(p)) <= dist_thresh) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = candidate;
    }
  }

  const auto needed = std::max<std::size_t>(
      kMinPlaneInliers, static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(cloud.size()))));
  if (best_count < needed) throw Error(ErrorKind::no_plane_found, "no plane with enough inliers");

  PlaneFit fit{best, inliers_of(cloud, best, dist_thresh)};
  std::vector<Vec3> pts;
  pts.reserve(fit.inliers.size());
  for (auto i : fit.inliers) pts.push_back(cloud.points[i]);
  const Plane refined = fit_plane(pts);
  IndexSet refined_inliers = inliers_of(cloud, refined, dist_thresh);
  if (refined_inliers.size() >= fit.inliers.size()) fit = PlaneFit{refined, std::move(refined_inliers)};
  return fit;
}

std::vector<SupportPlane> extract_support_planes(const PointCloud& cloud, const IndexSet& candidates,
                                                 double floor_height, double connect,
                                                 const SupportParams& params) {
  std::vector<SupportPlane> out;
  IndexSet raised;
  for (auto i : candidates) {
    if (cloud.points[i].z() - floor_height >= params.min_height) raised.push_back(i);
  }
  if (raised.size() < params.min_points) return out;

  std::vector<Vec3> pts;
  pts.reserve(raised.size());
  for (auto i : raised) pts.push_back(cloud.points[i]);
  const KdTree tree(pts);

  // Near-horizontal samples, by local PCA normal.
  std::vector<std::size_t> flat;  // positions in `raised`
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto nb = tree.knn(pts[k], params.normal_neighbors);
    if (nb.size() < 3) continue;
    std::vector<Vec3> local;
    local.reserve(nb.size());
    for (const auto& n : nb) local.push_back(pts[n.index]);
    if (std::abs(fit_plane(local).normal.z()) >= params.horizontal_cos) flat.push_back(k);
  }

  // Height histogram of the flat samples; the densest unclaimed bins become supports.
  const double bin = params.slab;
  std::map<long, std::size_t> hist;
  for (auto k : flat) ++hist[static_cast<long>(std::floor(pts[k].z() / bin))];
  std::vector<double> heights;
  while (true) {
    long best_bin = 0;
    std::size_t best = 0;
    for (const auto& [b, count] : hist) {
      const std::size_t window =
          count + (hist.count(b - 1) ? hist.at(b - 1) : 0) + (hist.count(b + 1) ? hist.at(b + 1) : 0);
      if (window > best) {
        best = window;
        best_bin = b;
      }
    }
    if (best < params.min_points) break;
    std::vector<double> zs;
    const double center = (static_cast<double>(best_bin) + 0.5) * bin;
    for (auto k : flat) {
      if (std::abs(pts[k].z() - center) <= 1.5 * bin) zs.push_back(pts[k].z());
    }
    heights.push_back(percentile(zs, 0.5));
    for (long b = best_bin - 2; b <= best_bin + 2; ++b) hist.erase(b);
  }
  std::sort(heights.begin(), heights.end());

  for (double h : heights) {
    // Separate furniture tops that share a height.
    PointCloud patch_pts;
    for (auto k : flat) {
      if (std::abs(pts[k].z() - h) <= params.slab) patch_pts.points.push_back(pts[k]);
    }
    for (const auto& members : cluster_instances(patch_pts, connect, params.min_points)) {
      std::vector<Vec3> top;
      for (auto m : members) top.push_back(patch_pts.points[m]);
      SupportPlane s;
      s.height = h;
      s.patch = Aabb::from_points(top);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (std::abs(pts[k].z() - h) > params.slab) continue;
        const Vec2 xy = pts[k].head<2>();
        if ((xy.array() >= s.patch.min.head<2>().array() - connect).all() &&
            (xy.array() <= s.patch.max.head<2>().array() + connect).all()) {
          s.inliers.push_back(raised[k]);
        }
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<IndexSet> cluster_instances(const PointCloud& cloud, double eps, std::size_t min_points) {
  IndexSet all(cloud.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return cluster_instances(cloud, all, eps, min_points);
}

std::vector<IndexSet> cluster_instances(const PointCloud& cloud, const IndexSet& subset, double eps,
                                        std::size_t min_points) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "cluster eps must be > 0");
  if (min_points < 1) throw Error(ErrorKind::invalid_argument, "min_points must be >= 1");
  std::vector<IndexSet> clusters;
  if (subset.empty()) return clusters;

  IndexSet ids = subset;
  std::sort(ids.begin(), ids.end());
  std::vector<Vec3> pts;
  pts.reserve(ids.size());
  for (auto i : ids) pts.push_back(cloud.points.at(i));
  const KdTree tree(pts);

  std::vector<char> seen(pts.size(), 0);
  std::vector<std::size_t> frontier;
  for (std::size_t s = 0; s < pts.size(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    IndexSet members{s};
    frontier.assign(1, s);
    while (!frontier.empty()) {
      const std::size_t cur = frontier.back();
      frontier.pop_back();
      for (auto n : tree.radius_search(pts[cur], eps)) {
        if (seen[n]) continue;
        seen[n] = 1;
        members.push_back(n);
        frontier.push_back(n);
      }
    }
    if (members.size() < min_points) continue;
    for (auto& m : members) m = ids[m];
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const IndexSet& a, const IndexSet& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return clusters;
}

void LabelConfig::validate() const {
  for (const auto& r : rules) {
    if (r.label.empty() || r.label == kStaticLabel) {
      throw Error(ErrorKind::invalid_argument, "label rule needs a name other than 'static'");
    }
    if ((r.size_min.array() < 0.0).any() || (r.size_max.array() <= 0.0).any() ||
        (r.size_min.array() > r.size_max.array()).any()) {
      throw Error(ErrorKind::invalid_argument, "label rule '" + r.label + "' has an invalid size range");
    }
    if (r.base_min > r.base_max) {
      throw Error(ErrorKind::invalid_argument, "label rule '" + r.label + "' has an inverted height band");
    }
  }
}

LabelConfig default_label_config() {
  // Measured spans lose the slab removed at the base (about 2 cm) and gain noise.
  LabelConfig c;
  c.rules = {
      {"white_can", {0.07, 0.07, 0.10}, {0.14, 0.14, 0.18}, 0.70, 0.90},
      {"green_can", {0.08, 0.08, 0.15}, {0.15, 0.15, 0.25}, -0.05, 0.10},
      {"green_mug", {0.09, 0.06, 0.05}, {0.15, 0.12, 0.12}, -0.05, 0.10},
      {"black_bottle", {0.04, 0.04, 0.18}, {0.11, 0.11, 0.30}, 0.35, 0.55},
      {"blue_plush", {0.08, 0.08, 0.11}, {0.15, 0.15, 0.20}, 0.35, 0.55},
      {"cow_plush", {0.17, 0.06, 0.07}, {0.27, 0.13, 0.16}, 0.35, 0.55},
  };
  return c;
}

ClusterShape measure_cluster(const PointCloud& cloud, const IndexSet& members) {
  ClusterShape shape;
  if (members.empty()) return shape;
  std::vector<double> zs;
  Vec2 c = Vec2::Zero();
  for (auto i : members) {
    zs.push_back(cloud.points[i].z());
    c += cloud.points[i].head<2>();
  }
  c /= static_cast<double>(members.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (auto i : members) {
    const Vec2 d = cloud.points[i].head<2>() - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  std::vector<double> u;
  std::vector<double> v;
  for (auto i : members) {
    const Vec2 d = cloud.points[i].head<2>() - c;
    u.push_back(d.dot(eig.eigenvectors().col(0)));
    v.push_back(d.dot(eig.eigenvectors().col(1)));
  }
  const double su = span(std::move(u));
  const double sv = span(std::move(v));
  shape.size = Vec3(std::max(su, sv), std::min(su, sv), span(zs));
  shape.base = zs.size() < 2 ? zs.front() : percentile(zs, 0.01);
  return shape;
}

std::vector<LabeledCluster> assign_labels(const std::vector<IndexSet>& clusters, const PointCloud& cloud,
                                          const LabelConfig& config, double floor_height) {
  std::vector<LabeledCluster> out;
  out.reserve(clusters.size());
  for (const auto& members : clusters) {
    const ClusterShape shape = measure_cluster(cloud, members);
    std::string label = kStaticLabel;
    for (const auto& rule : config.rules) {
      const bool fits = (shape.size.array() >= rule.size_min.array()).all() &&
                        (shape.size.array() <= rule.size_max.array()).all() &&
                        within(shape.base - floor_height, rule.base_min, rule.base_max);
      if (fits) {
        label = rule.label;
        break;
      }
    }
    out.push_back({members, std::move(label)});
  }
  return out;
}

SceneBundle build_bundle(const PointCloud& cloud, const Plane& floor, const std::vector<LabeledCluster>& clusters,
                         const std::vector<DrawerModel>& drawers, const Workspace& workspace) {
  std::vector<char> owned(cloud.size(), 0);
  for (const auto& c : clusters) {
    for (auto i : c.members) {
      if (i >= cloud.size()) throw Error(ErrorKind::invalid_argument, "cluster index out of range");
      if (owned[i]) throw Error(ErrorKind::overlapping_clusters, "point " + std::to_string(i) + " is in two clusters");
      owned[i] = 1;
    }
  }

  SceneBundle b;
  b.floor_height = floor_height_of(floor);
  b.drawers = drawers;
  b.workspace = workspace;
  std::vector<char> movable(cloud.size(), 0);
  for (const auto& c : clusters) {
    if (c.label == kStaticLabel || c.members.empty()) continue;
    PointCloud obj;
    obj.points.reserve(c.members.size());
    for (auto i : c.members) {
      obj.points.push_back(cloud.points[i]);
      movable[i] = 1;
    }
    b.objects.push_back(make_instance(static_cast<int>(b.objects.size()), c.label, std::move(obj)));
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!movable[i]) b.static_cloud.points.push_back(cloud.points[i]);
  }
  return b;
}

Segmentation segment_scene(const PointCloud& cloud, const LabelConfig& config, const std::vector<DrawerModel>& drawers,
                           const Workspace& workspace, const SegmentationParams& params) {
  config.validate();
  Segmentation s;
  s.floor = extract_ground_plane(cloud, params.plane_dist, params.plane_iterations, params.seed);
  const double floor_z = floor_height_of(s.floor.plane);

  std::vector<char> removed(cloud.size(), 0);
  for (auto i : s.floor.inliers) removed[i] = 1;
  IndexSet rest;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!removed[i]) rest.push_back(i);
  }
  s.supports = extract_support_planes(cloud, rest, floor_z, params.eps, params.support);
  for (const auto& sp : s.supports) {
    for (auto i : sp.inliers) removed[i] = 1;
  }
  // TODO: reclaim plane inliers inside an object's footprint. At noise
  // eps / 4 about a tenth of each object's base points end up static.
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!removed[i]) s.clustered.push_back(i);
  }

  const auto clusters = cluster_instances(cloud, s.clustered, params.eps, params.min_points);
  s.clusters = assign_labels(clusters, cloud, config, floor_z);
  s.bundle = build_bundle(cloud, s.floor.plane, s.clusters, drawers, workspace);
  for (std::size_t k = 0; k < s.supports.size(); ++k) {
    const auto& sp = s.supports[k];
    Aabb top = sp.patch;
    top.min.z() = top.max.z() = sp.height;
    s.bundle.supports.push_back(SupportSurface{"support_" + std::to_string(k), top});
  }
  return s;
}

}  // namespace dollhouse
