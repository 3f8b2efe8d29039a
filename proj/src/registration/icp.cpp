#include "dollhouse/registration/icp.hpp"

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "dollhouse/error.hpp"
#include "dollhouse/scene/voxel.hpp"

namespace dollhouse {
namespace {

void check_params(const IcpParams& p) {
  if (p.max_iterations < 1 || !(p.convergence_eps > 0.0) || !(p.max_correspondence_dist > 0.0) ||
      p.max_source_points < 3) {
    throw Error(ErrorKind::invalid_argument, "ICP parameters must be positive");
  }
}

/// Rotation is underdetermined when the source spread is (nearly) one-dimensional.
bool degenerate(const std::vector<Vec3>& pts) {
  if (pts.size() < 3) return true;
  const Vec3 c = centroid(pts);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();  // ascending
  return ev(2) <= 1e-18 || ev(1) <= 1e-10 * ev(2);
}

struct Matches {
  std::vector<Vec3> from;
  std::vector<Vec3> to;
  double truncated_sq = 0.0;
  double inlier_sq = 0.0;
};

std::vector<Vec3> pca_normals(const KdTree& tree, std::size_t k) {
  std::vector<Vec3> normals(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto nb = tree.knn(tree.point(i), std::max<std::size_t>(k, 3));
    Vec3 m = Vec3::Zero();
    for (const auto& n : nb) m += tree.point(n.index);
    m /= static_cast<double>(nb.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& n : nb) cov += (tree.point(n.index) - m) * (tree.point(n.index) - m).transpose();
    normals[i] = Eigen::SelfAdjointEigenSolver<Mat3>(cov).eigenvectors().col(0).normalized();
  }
  return normals;
}

/// Linearized point-to-plane step, rotating about the centroid of `from`.
RigidTransform fit_plane_step(const std::vector<Vec3>& from, const std::vector<Vec3>& to,
                              const std::vector<Vec3>& normals) {
  const Vec3 c = centroid(from);
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Vec3& n = normals[i];
    const Vec3 p = from[i] - c;
    Eigen::Matrix<double, 6, 1> j;
    j << p.cross(n), n;
    a += j * j.transpose();
    b += j * (from[i] - to[i]).dot(n);
  }
  // Light damping keeps unobservable directions (e.g. spin of a cylinder) still.
  const double damping = 1e-6 * std::max(a.diagonal().maxCoeff(), 1e-12);
  a.diagonal().array() += damping;
  const Eigen::Matrix<double, 6, 1> x = a.ldlt().solve(-b);
  const Vec3 w = x.head<3>();
  RigidTransform step;
  const double angle = w.norm();
  if (angle > 0.0) step.rotation = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
  step.translation = c + x.tail<3>() - step.rotation * c;
  return step;
}

Matches match(const std::vector<Vec3>& current, const KdTree& target, double cutoff,
              const std::vector<Vec3>* target_normals = nullptr, std::vector<Vec3>* normals_out = nullptr) {
  Matches m;
  m.from.reserve(current.size());
  m.to.reserve(current.size());
  const double cutoff_sq = cutoff * cutoff;
  for (const auto& p : current) {
    const Neighbor n = target.nearest(p);
    const double d2 = n.distance * n.distance;
    if (n.distance <= cutoff) {
      m.from.push_back(p);
      m.to.push_back(target.point(n.index));
      if (target_normals) normals_out->push_back((*target_normals)[n.index]);
      m.inlier_sq += d2;
      m.truncated_sq += d2;
    } else {
      m.truncated_sq += cutoff_sq;
    }
  }
  return m;
}

}  // namespace

RigidTransform fit_rigid(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  if (from.size() != to.size() || from.empty()) {
    throw Error(ErrorKind::invalid_argument, "fit_rigid needs matched, non-empty point lists");
  }
  const Vec3 cf = centroid(from);
  const Vec3 ct = centroid(to);
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h += (from[i] - cf) * (to[i] - ct).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = ct - t.rotation * cf;
  return t;
}

IcpResult icp_align(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                    const IcpParams& params) {
  if (target.empty()) throw Error(ErrorKind::empty_cloud, "ICP target is empty");
  const KdTree index(target.points);
  return icp_align(source, index, init, params);
}

namespace {

IcpResult align(const PointCloud& source, const KdTree& target, const std::vector<Vec3>* target_normals,
                const RigidTransform& init, const IcpParams& params) {
  check_params(params);
  if (source.empty()) throw Error(ErrorKind::empty_cloud, "ICP source is empty");

  std::vector<Vec3> src;
  for (auto i : subsample_to_budget(source.points, params.max_source_points)) src.push_back(source.points[i]);
  if (degenerate(src)) throw Error(ErrorKind::degenerate_source, "source points are collinear or coincident");

  const double n = static_cast<double>(src.size());
  IcpResult result;
  result.transform = init;
  std::vector<Vec3> current(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) current[i] = init(src[i]);

  std::vector<Vec3> normals;
  auto rematch = [&] {
    normals.clear();
    return match(current, target, params.max_correspondence_dist, target_normals, &normals);
  };
  Matches m = rematch();
  result.rmse_history.push_back(std::sqrt(m.truncated_sq / n));

  for (int it = 1; it <= params.max_iterations; ++it) {
    if (m.from.size() < 3) break;
    const RigidTransform step = target_normals ? fit_plane_step(m.from, m.to, normals) : fit_rigid(m.from, m.to);
    double shift = 0.0;
    for (auto& p : current) {
      const Vec3 moved = step(p);
      shift += (moved - p).norm();
      p = moved;
    }
    shift /= n;
    result.transform = compose(step, result.transform);
    m = rematch();
    result.rmse_history.push_back(std::sqrt(m.truncated_sq / n));
    result.iterations = it;
    if (shift < params.convergence_eps) {
      result.converged = true;
      break;
    }
  }
  result.rmse = result.rmse_history.back();
  result.inlier_fraction = static_cast<double>(m.from.size()) / n;
  result.inlier_rmse = m.from.empty() ? 0.0 : std::sqrt(m.inlier_sq / static_cast<double>(m.from.size()));
  return result;
}

}  // namespace

IcpResult icp_align(const PointCloud& source, const KdTree& target, const RigidTransform& init,
                    const IcpParams& params) {
  if (params.metric == IcpMetric::point_to_plane) {
    const std::vector<Vec3> normals = pca_normals(target, params.normal_neighbors);
    return align(source, target, &normals, init, params);
  }
  return align(source, target, nullptr, init, params);
}

IcpTarget::IcpTarget(std::vector<Vec3> points, std::size_t normal_neighbors)
    : tree(std::move(points)), normals(pca_normals(tree, normal_neighbors)) {}

IcpResult icp_align(const PointCloud& source, const IcpTarget& target, const RigidTransform& init,
                    const IcpParams& params) {
  return align(source, target.tree,
               params.metric == IcpMetric::point_to_plane ? &target.normals : nullptr, init, params);
}

}  // namespace dollhouse
