#include "tmsnav/registration.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmsnav/error.hpp"

namespace tmsnav {

namespace {

constexpr double kMinSpread = 1e-6;
constexpr std::size_t kMinCloudSize = 10;
constexpr double kMaxExtrapolation = 64.0;

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

// Second singular value of the centered point matrix; zero for collinear sets.
double planar_spread(std::span<const Vec3> points) {
  const Vec3 c = centroid(points);
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : points) scatter += (p - c) * (p - c).transpose();
  Eigen::JacobiSVD<Mat3> svd(scatter);
  return std::sqrt(std::max(0.0, svd.singularValues()(1)));
}

double mean_distance(const RigidTransform& t, std::span<const Vec3> source,
                     std::span<const Vec3> target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) sum += (t.apply(source[i]) - target[i]).norm();
  return sum / static_cast<double>(source.size());
}

struct Correspondences {
  std::vector<Vec3> source;
  std::vector<Vec3> target;
  double mean_residual = 0.0;
};

Correspondences match(const TriangleMesh& skin, std::span<const Vec3> cloud,
                      const RigidTransform& t, double trim_fraction) {
  std::vector<SurfaceHit> hits(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) hits[i] = closest_point(skin, t.apply(cloud[i]));

  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto drop =
      static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(cloud.size())));
  if (drop > 0) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return hits[a].ray_parameter < hits[b].ray_parameter;
    });
    order.resize(cloud.size() - drop);
    std::sort(order.begin(), order.end());
  }

  Correspondences c;
  c.source.reserve(order.size());
  c.target.reserve(order.size());
  double sum = 0.0;
  for (auto i : order) {
    c.source.push_back(cloud[i]);
    c.target.push_back(hits[i].point);
    sum += hits[i].ray_parameter;
  }
  c.mean_residual = sum / static_cast<double>(order.size());
  return c;
}

}  // namespace

void LandmarkSet::validate() const {
  if (image_points.size() != probe_points.size() || names.size() != image_points.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "landmark names, image points and probe points differ in length");
  }
  if (image_points.size() < 3) {
    throw Error(ErrorKind::InvalidArgument, "at least 3 landmark pairs are required");
  }
  if (!(planar_spread(image_points) > kMinSpread) || !(planar_spread(probe_points) > kMinSpread)) {
    throw Error(ErrorKind::DegenerateLandmarks, "landmarks are collinear");
  }
}

bool passes_gate(std::optional<double> pairpoint_residual_mean,
                 std::optional<double> icp_residual_mean, const AcceptanceThresholds& thresholds) {
  if (pairpoint_residual_mean && !(*pairpoint_residual_mean <= thresholds.pairpoint_mm))
    return false;
  if (icp_residual_mean && !(*icp_residual_mean <= thresholds.icp_mm)) return false;
  return true;
}

RigidTransform fit_rigid(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size() || source.size() < 3) {
    throw Error(ErrorKind::InvalidArgument, "rigid fit needs >= 3 matched points");
  }
  if (!(planar_spread(source) > kMinSpread) || !(planar_spread(target) > kMinSpread)) {
    throw Error(ErrorKind::DegenerateCorrespondences, "matched points are collinear");
  }
  const Vec3 cs = centroid(source);
  const Vec3 ct = centroid(target);
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    h += (source[i] - cs) * (target[i] - ct).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  Mat3 v = svd.matrixV();
  // Reflection case: flip the axis of the smallest singular value.
  if ((v * u.transpose()).determinant() < 0.0) v.col(2) *= -1.0;
  Mat3 r = v * u.transpose();
  if (!is_proper_rotation(r, 1e-12)) r = nearest_rotation(r);
  return RigidTransform(r, ct - r * cs);
}

RegistrationResult pairpoint_register(const LandmarkSet& landmarks,
                                      const AcceptanceThresholds& thresholds) {
  landmarks.validate();
  RegistrationResult result;
  result.transform = fit_rigid(landmarks.probe_points, landmarks.image_points);
  result.pairpoint_residual_mean =
      mean_distance(result.transform, landmarks.probe_points, landmarks.image_points);
  result.accepted = passes_gate(result.pairpoint_residual_mean, std::nullopt, thresholds);
  result.landmark_names = landmarks.names;
  return result;
}

RegistrationResult icp_refine(const TriangleMesh& skin, std::span<const Vec3> cloud,
                              const RigidTransform& init, const IcpConfig& config) {
  if (cloud.size() < kMinCloudSize) {
    throw Error(ErrorKind::InvalidArgument, "ICP needs at least 10 cloud points");
  }
  if (!(config.trim_fraction >= 0.0 && config.trim_fraction < 1.0) || config.max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "invalid ICP configuration");
  }

  RegistrationResult result;
  RigidTransform current = init;
  Correspondences corr = match(skin, cloud, current, config.trim_fraction);
  result.icp_residual_history.push_back(corr.mean_residual);
  result.converged = false;

  const Vec3 cloud_center = centroid(cloud);
  for (int it = 1; it <= config.max_iterations; ++it) {
    result.iterations = it;
    RigidTransform candidate = fit_rigid(corr.source, corr.target);
    Correspondences next = match(skin, cloud, candidate, config.trim_fraction);
    if (next.mean_residual > corr.mean_residual) {
      // The squared error fell but the mean distance rose; keep the better state.
      result.converged = true;
      break;
    }

    // Extrapolate the update (rotation about the moved cloud centroid plus
    // translation) while the residual keeps falling. Sliding along a smooth
    // surface otherwise takes hundreds of small steps.
    const Vec3 pivot = current.apply(cloud_center);
    const Eigen::AngleAxisd step(candidate.rotation() * current.rotation().transpose());
    const Vec3 shift = candidate.apply(cloud_center) - pivot;
    for (double k = 2.0; k <= kMaxExtrapolation; k *= 2.0) {
      const Mat3 rk = Eigen::AngleAxisd(k * step.angle(), step.axis()).toRotationMatrix();
      const RigidTransform trial(nearest_rotation(rk * current.rotation()),
                                 rk * (current.translation() - pivot) + pivot + k * shift);
      Correspondences trial_corr = match(skin, cloud, trial, config.trim_fraction);
      if (!(trial_corr.mean_residual < next.mean_residual)) break;
      candidate = trial;
      next = std::move(trial_corr);
    }

    const double previous = corr.mean_residual;
    const double improvement = previous - next.mean_residual;
    current = candidate;
    corr = std::move(next);
    result.icp_residual_history.push_back(corr.mean_residual);
    if (improvement <= config.convergence_delta_mm * previous) {
      result.converged = true;
      break;
    }
  }

  result.transform = current;
  result.icp_residual_mean = corr.mean_residual;
  result.accepted = passes_gate(std::nullopt, result.icp_residual_mean, config.thresholds);
  return result;
}

RegistrationResult icp_refine(const TriangleMesh& skin, std::span<const Vec3> cloud,
                              const RegistrationResult& initial, const IcpConfig& config) {
  RegistrationResult result = icp_refine(skin, cloud, initial.transform, config);
  result.pairpoint_residual_mean = initial.pairpoint_residual_mean;
  result.landmark_names = initial.landmark_names;
  result.accepted =
      passes_gate(result.pairpoint_residual_mean, result.icp_residual_mean, config.thresholds);
  return result;
}

FiducialReport fiducial_residual_report(const RegistrationResult& result,
                                        const LandmarkSet& landmarks) {
  landmarks.validate();
  if (result.landmark_names != landmarks.names) {
    throw Error(ErrorKind::LandmarkMismatch,
                "registration result was computed from a different landmark set");
  }
  FiducialReport report;
  for (std::size_t i = 0; i < landmarks.names.size(); ++i) {
    const double d =
        (result.transform.apply(landmarks.probe_points[i]) - landmarks.image_points[i]).norm();
    report.rows.push_back({landmarks.names[i], d});
    report.mean_mm += d;
    report.max_mm = std::max(report.max_mm, d);
  }
  report.mean_mm /= static_cast<double>(report.rows.size());
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const FiducialRow& a, const FiducialRow& b) { return a.name < b.name; });
  return report;
}

}  // namespace tmsnav
