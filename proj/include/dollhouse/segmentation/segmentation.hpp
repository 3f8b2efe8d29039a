#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dollhouse/scene/bundle.hpp"
#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

using IndexSet = std::vector<std::size_t>;

/// Points p with normal.dot(p) == offset. For a floor, offset is its height.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

struct PlaneFit {
  Plane plane;
  IndexSet inliers;  // ascending
};

/// Smallest inlier count accepted as a plane, in addition to the 5% fraction.
inline constexpr std::size_t kMinPlaneInliers = 50;

/// RANSAC over 3-point samples followed by a least-squares refit on the
/// inliers. The normal is flipped to point +z-ward.
/// Throws invalid_argument (fewer than 3 points, dist_thresh <= 0) and
/// no_plane_found.
PlaneFit extract_ground_plane(const PointCloud& cloud, double dist_thresh, int iterations, std::uint64_t seed);

/// A horizontal furniture top found above the floor.
struct SupportPlane {
  double height = 0.0;  // absolute z
  Aabb patch;           // extent of the near-horizontal points at that height
  IndexSet inliers;     // indices of the input removed with the slab
};

struct SupportParams {
  double slab = 0.02;               // half thickness of the removed slab (m)
  std::size_t min_points = 300;     // horizontal samples needed to call a height a support
  double min_height = 0.1;          // above the floor
  std::size_t normal_neighbors = 12;
  double horizontal_cos = 0.95;     // |n.z| needed to count a point as horizontal
};

/// Finds furniture tops among `candidates` (indices into `cloud`) and returns
/// each with the slab of points that touch it: candidates within `slab` of the
/// height whose x/y lies inside the top's extent grown by `connect`.
std::vector<SupportPlane> extract_support_planes(const PointCloud& cloud, const IndexSet& candidates,
                                                 double floor_height, double connect,
                                                 const SupportParams& params = {});

/// Euclidean clustering: points linked by chains of neighbors within `eps`
/// share a cluster. Clusters under `min_points` are dropped. Members are
/// ascending; clusters are sorted by descending size, then lowest member.
/// Throws invalid_argument for eps <= 0 or min_points < 1.
std::vector<IndexSet> cluster_instances(const PointCloud& cloud, double eps, std::size_t min_points);

/// Same over a subset of the cloud; returned indices refer to `cloud`.
std::vector<IndexSet> cluster_instances(const PointCloud& cloud, const IndexSet& subset, double eps,
                                        std::size_t min_points);

/// Size is (long horizontal, short horizontal, vertical) extent. The height
/// band bounds the cluster base above the floor.
struct LabelRule {
  std::string label;
  Vec3 size_min = Vec3::Zero();
  Vec3 size_max = Vec3::Zero();
  double base_min = 0.0;
  double base_max = 0.0;
};

struct LabelConfig {
  std::vector<LabelRule> rules;

  /// Throws invalid_argument on empty size ranges or inverted bands.
  void validate() const;
};

/// Rules for the six objects of the default scene.
LabelConfig default_label_config();

inline constexpr const char* kStaticLabel = "static";

/// Robust shape of a point set: 1st to 99th percentile spans, with the
/// horizontal pair measured along its principal axes.
struct ClusterShape {
  Vec3 size = Vec3::Zero();  // long, short, vertical
  double base = 0.0;         // absolute z of the base
};

ClusterShape measure_cluster(const PointCloud& cloud, const IndexSet& members);

struct LabeledCluster {
  IndexSet members;
  std::string label;
};

/// First matching rule wins; anything else is labeled "static".
std::vector<LabeledCluster> assign_labels(const std::vector<IndexSet>& clusters, const PointCloud& cloud,
                                          const LabelConfig& config, double floor_height = 0.0);

/// Non-static clusters become movable objects with ids in list order; every
/// other point of `cloud` goes to static_cloud in input order.
/// Throws overlapping_clusters and invalid_argument (index out of range).
SceneBundle build_bundle(const PointCloud& cloud, const Plane& floor, const std::vector<LabeledCluster>& clusters,
                         const std::vector<DrawerModel>& drawers, const Workspace& workspace);

struct SegmentationParams {
  double plane_dist = 0.02;
  int plane_iterations = 300;
  std::uint64_t seed = 1;
  double eps = 0.03;
  std::size_t min_points = 30;
  SupportParams support;
};

struct Segmentation {
  SceneBundle bundle;
  PlaneFit floor;
  std::vector<SupportPlane> supports;
  IndexSet clustered;                    // points handed to clustering
  std::vector<LabeledCluster> clusters;  // all clusters, including static ones
};

/// Floor removal, support-slab removal, clustering, labeling and bundling.
/// Supports are named "support_<k>" in ascending height.
Segmentation segment_scene(const PointCloud& cloud, const LabelConfig& config, const std::vector<DrawerModel>& drawers,
                           const Workspace& workspace, const SegmentationParams& params = {});

}  // namespace dollhouse
