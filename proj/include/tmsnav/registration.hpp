#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmsnav/geometry.hpp"
#include "tmsnav/mesh.hpp"

namespace tmsnav {

/// Anatomical landmarks picked in the image (frame H) and touched with the tracked
/// probe (frame Hr), matched by position in the lists.
struct LandmarkSet {
  std::vector<std::string> names;
  std::vector<Vec3> image_points;
  std::vector<Vec3> probe_points;

  /// Throws InvalidArgument on size problems, DegenerateLandmarks on collinear sets.
  void validate() const;
};

struct AcceptanceThresholds {
  double pairpoint_mm = 6.0;
  double icp_mm = 2.0;
};

/// Outcome of a registration. `transform` maps probe (Hr) coordinates onto image
/// (H) coordinates.
struct RegistrationResult {
  RigidTransform transform;
  std::optional<double> pairpoint_residual_mean;
  std::optional<double> icp_residual_mean;
  bool accepted = false;
  bool converged = true;
  int iterations = 0;
  /// Mean ICP residual after each evaluation, starting with the initial guess.
  std::vector<double> icp_residual_history;
  /// Landmark names the pair-point solve used, in input order.
  std::vector<std::string> landmark_names;
};

bool passes_gate(std::optional<double> pairpoint_residual_mean,
                 std::optional<double> icp_residual_mean, const AcceptanceThresholds& thresholds);

/// Least-squares rigid motion taking `source[i]` onto `target[i]` (centroids plus
/// SVD of the cross-covariance, reflection corrected). Throws DegenerateCorrespondences
/// when the points do not span a plane.
RigidTransform fit_rigid(std::span<const Vec3> source, std::span<const Vec3> target);

RegistrationResult pairpoint_register(const LandmarkSet& landmarks,
                                      const AcceptanceThresholds& thresholds = {});

struct IcpConfig {
  int max_iterations = 100;
  double convergence_delta_mm = 1e-4;
  /// Fraction of worst correspondences dropped before each solve.
  double trim_fraction = 0.0;
  AcceptanceThresholds thresholds;
};

/// Point-to-surface ICP of a probed cloud (frame Hr) against the skin mesh (frame H).
/// Stops when the mean residual improves by no more than `convergence_delta_mm` times
/// its previous value (a relative threshold despite the field name), when a step
/// would increase it, or at `max_iterations` (then `converged` is false).
RegistrationResult icp_refine(const TriangleMesh& skin, std::span<const Vec3> cloud,
                              const RigidTransform& init, const IcpConfig& config = {});

/// As above, seeded from a pair-point result whose residual is carried into the gate.
RegistrationResult icp_refine(const TriangleMesh& skin, std::span<const Vec3> cloud,
                              const RegistrationResult& initial, const IcpConfig& config = {});

struct FiducialRow {
  std::string name;
  double distance_mm = 0.0;
};

struct FiducialReport {
  std::vector<FiducialRow> rows;  // sorted by name
  double mean_mm = 0.0;
  double max_mm = 0.0;
};

FiducialReport fiducial_residual_report(const RegistrationResult& result,
                                        const LandmarkSet& landmarks);

}  // namespace tmsnav
