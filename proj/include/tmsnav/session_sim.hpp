#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmsnav/fieldsim.hpp"
#include "tmsnav/kinematics.hpp"
#include "tmsnav/pose_plan.hpp"
#include "tmsnav/random.hpp"

namespace tmsnav {

enum class ActuationLabel { Robotic, Manual };

std::string_view to_string(ActuationLabel label);
ActuationLabel actuation_label_from_string(std::string_view s);

/// Noise model for placing the coil on a planned pose.
///
/// Each placement adds isotropic Gaussian translation noise and a rotation about a
/// uniformly random axis with a Gaussian angle. Holding sessions also accumulate a
/// random walk in the plan's tangent plane whose per-axis standard deviation after
/// one minute is `drift_per_minute_mm`.
///
/// The rotation sigmas of the presets follow the reported mean rotation errors
/// (2.5e-3 rad robotic, 0.14 rad manual). The translation sigmas and the manual
/// drift are stand-ins, not measured values.
struct ActuationModel {
  ActuationLabel label = ActuationLabel::Robotic;
  double translation_sigma_mm = 0.0;
  double rotation_sigma_rad = 0.0;
  double drift_per_minute_mm = 0.0;
  std::uint64_t rng_seed = 0;

  static ActuationModel robotic(std::uint64_t seed = 0);
  static ActuationModel manual(std::uint64_t seed = 0);
  static ActuationModel zero_noise(std::uint64_t seed = 0);

  void validate() const;
  bool operator==(const ActuationModel&) const = default;
};

enum class SessionKind { Alignment, Holding };

std::string_view to_string(SessionKind kind);
SessionKind session_kind_from_string(std::string_view s);

struct SessionSample {
  double timestamp_s = 0.0;
  RigidTransform measured;
  PoseError error;
  /// Holding sessions: per-axis peak-to-peak volts (primary first).
  std::vector<double> voltages_vpp;

  bool operator==(const SessionSample&) const = default;
};

struct SessionRecord {
  SessionKind kind = SessionKind::Alignment;
  PlanPose planned;
  ActuationModel model;
  std::vector<SessionSample> samples;

  bool operator==(const SessionRecord&) const = default;
};

inline constexpr double kAlignmentIntervalS = 30.0;

SessionRecord run_alignment_trials(const PlanPose& plan, const ActuationModel& model,
                                   int repetitions);

/// Holds the coil on `plan` for `train.trains` trains. Train k starts at
/// k * train.train_period_s(); the actuated plan pose, turned by approach_flip(),
/// drives the coil and the sensor stays at its own pose in the head frame.
SessionRecord run_holding_session(const PlanPose& plan, const ActuationModel& model,
                                  const CoilModel& coil, const SensorModel& sensor,
                                  const PulseTrain& train);

/// One placement draw around `planned`; exposed for tests.
RigidTransform perturb_pose(const RigidTransform& planned, double translation_sigma_mm,
                            double rotation_sigma_rad, Rng& rng);

struct MetricStats {
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation; 0 for a single value
  double min = 0.0;
  double max = 0.0;

  bool operator==(const MetricStats&) const = default;
};

/// Streaming (Welford) accumulator behind summarize().
class RunningStats {
 public:
  void add(double x);
  MetricStats finish(std::string metric) const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Rows: translation_error_mm, rotation_error_rad, then one row per voltage axis
/// (primary_vpp, secondary1_vpp, secondary2_vpp) when present.
std::vector<MetricStats> summarize(const SessionRecord& record);

void write_summary_csv(const std::vector<MetricStats>& stats, std::ostream& out);
std::vector<MetricStats> read_summary_csv(std::istream& in);

/// Per-train voltage traces as a plain SVG line plot.
void write_voltage_svg(const SessionRecord& record, std::ostream& out);

}  // namespace tmsnav
