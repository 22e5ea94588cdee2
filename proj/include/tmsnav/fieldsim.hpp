#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "tmsnav/geometry.hpp"

namespace tmsnav {

/// Quasi-static field model of a TMS coil. All lengths are millimeters; fields are
/// tesla; currents amperes.

enum class CoilLayout {
  Figure8,     // two wings centered at +/- wing_center_offset along coil x
  SingleLoop,  // one wing centered at the coil origin
};

enum class Wing { Plus, Minus };

/// Coil frame: windings in the local xy plane, z into the head, y along the tail.
/// The Plus wing winds counter-clockwise about +z, the Minus wing clockwise.
struct CoilModel {
  CoilLayout layout = CoilLayout::Figure8;
  double loop_radius_mm = 35.0;
  int turns = 9;
  double wing_center_offset_mm = 35.0;
  int segments_per_loop = 256;
  double peak_current_a = 5000.0;
  RigidTransform pose;

  void validate() const;
};

enum class SensorKind { Sensor2D, Sensor3D };

/// Inductive pick-up coil. Axis 0 (primary) is local z; a 3D sensor adds axis 1
/// (local x) and axis 2 (local y) around the same center.
struct SensorModel {
  SensorKind kind = SensorKind::Sensor3D;
  double loop_radius_mm = 7.5;
  int turns_per_axis = 10;
  RigidTransform pose;

  int axis_count() const { return kind == SensorKind::Sensor3D ? 3 : 1; }
  Vec3 axis_direction(int axis) const;
  void validate() const;
};

/// Repetitive-mode stimulation. Each pulse is one sine cycle at `pulse_frequency_hz`.
struct PulseTrain {
  int pulses_per_train = 25;
  double train_rate_hz = 5.0;
  double intensity_fraction = 0.30;
  int trains = 20;
  double inter_train_wait_s = 10.0;
  double pulse_frequency_hz = 4000.0;

  double train_duration_s() const { return pulses_per_train / train_rate_hz; }
  double train_period_s() const { return train_duration_s() + inter_train_wait_s; }
  void validate() const;
};

struct QuadratureOrder {
  int radial = 8;
  int angular = 16;
};

inline constexpr double kMinWireDistanceMm = 0.1;

/// Field of one wing at `point` (world frame), at the model's peak current.
Vec3 wing_field(const CoilModel& coil, Wing wing, const Vec3& point);

/// Total coil field at `point`. Throws SingularEvaluation within 0.1 mm of a wire.
Vec3 b_field(const CoilModel& coil, const Vec3& point);

/// Flux linkage per ampere of coil current through one sensor axis (Wb/A),
/// including the sensor turns.
double flux_coefficient(const CoilModel& coil, const SensorModel& sensor, int axis,
                        QuadratureOrder order = {});

struct AxisVoltage {
  double peak_to_peak_v = 0.0;
  std::vector<double> emf_v;  // one pulse, sampled on InducedVoltage::time_s
};

struct InducedVoltage {
  std::vector<double> time_s;
  std::vector<AxisVoltage> axes;
};

inline constexpr int kSamplesPerPulseCycle = 40;

InducedVoltage induced_voltage(const CoilModel& coil, const SensorModel& sensor,
                               const PulseTrain& train, QuadratureOrder order = {});

struct SweepRow {
  double offset_mm = 0.0;
  std::array<double, 3> peak_to_peak_v{};  // primary, secondary1, secondary2
};

/// Moves the sensor by offset * direction (world frame) and evaluates the induced
/// peak-to-peak voltage per axis. Axes a 2D sensor lacks are reported as 0.
std::vector<SweepRow> displacement_sweep(const CoilModel& coil, const SensorModel& sensor,
                                         const PulseTrain& train, const Vec3& direction,
                                         std::span<const double> offsets_mm,
                                         QuadratureOrder order = {});

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

}  // namespace tmsnav
