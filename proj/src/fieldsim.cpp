#include "tmsnav/fieldsim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "tmsnav/error.hpp"
#include "tmsnav/format.hpp"

namespace tmsnav {

namespace {

constexpr double kMu0Over4Pi = 1e-7;  // T m / A
constexpr double kMmToM = 1e-3;

struct Quadrature1D {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre rule mapped to [0, 1], Newton iteration on P_n.
Quadrature1D gauss_legendre(int n) {
  Quadrature1D q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : (n == 1 ? x : p1);
      const double pn_1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pn_1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto idx = static_cast<std::size_t>(i);
    q.nodes[idx] = 0.5 * (1.0 - x);
    q.weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2) halved
  }
  return q;
}

std::vector<Vec3> wing_vertices(const CoilModel& coil, Wing wing) {
  const double offset = coil.layout == CoilLayout::SingleLoop ? 0.0 : coil.wing_center_offset_mm;
  const auto n = static_cast<std::size_t>(coil.segments_per_loop);
  std::vector<Vec3> v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k % n) / static_cast<double>(n);
    Vec3 p(offset + coil.loop_radius_mm * std::cos(phi), coil.loop_radius_mm * std::sin(phi), 0.0);
    // The Minus wing is the mirror image through x = 0, which reverses its sense.
    if (wing == Wing::Minus) p.x() = -p.x();
    v[k] = p;
  }
  return v;
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

// Field of one wing at a point given in coil coordinates, in the coil frame.
Vec3 local_wing_field(const CoilModel& coil, Wing wing, const Vec3& local) {
  const std::vector<Vec3> v = wing_vertices(coil, wing);
  Vec3 sum = Vec3::Zero();
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    if (segment_distance(local, v[k], v[k + 1]) <= kMinWireDistanceMm) {
      throw Error(ErrorKind::SingularEvaluation, "evaluation point lies on a coil wire");
    }
    const Vec3 dl = v[k + 1] - v[k];
    const Vec3 r = local - 0.5 * (v[k] + v[k + 1]);
    const double rn = r.norm();
    sum += dl.cross(r) / (rn * rn * rn);
  }
  const double current = coil.peak_current_a * coil.turns;
  // dl and r in mm: (mm * mm) / mm^3 = 1/mm = 1e3 / m.
  return kMu0Over4Pi * current * sum / kMmToM;
}

bool has_wing(const CoilModel& coil, Wing wing) {
  return coil.layout == CoilLayout::Figure8 || wing == Wing::Plus;
}

}  // namespace

void CoilModel::validate() const {
  if (!(loop_radius_mm > 0.0) || turns < 1 || segments_per_loop < 64 ||
      !(wing_center_offset_mm >= 0.0) || !std::isfinite(peak_current_a)) {
    throw Error(ErrorKind::InvalidArgument,
                "coil needs radius > 0, turns >= 1, >= 64 segments per loop, offset >= 0");
  }
}

Vec3 SensorModel::axis_direction(int axis) const {
  if (axis < 0 || axis >= axis_count()) {
    throw Error(ErrorKind::InvalidArgument, "sensor has no axis " + std::to_string(axis));
  }
  constexpr std::array<int, 3> kColumn{2, 0, 1};
  return pose.rotation().col(kColumn[static_cast<std::size_t>(axis)]);
}

void SensorModel::validate() const {
  if (!(loop_radius_mm > 0.0) || turns_per_axis < 1) {
    throw Error(ErrorKind::InvalidArgument, "sensor needs radius > 0 and turns >= 1");
  }
}

void PulseTrain::validate() const {
  if (pulses_per_train < 1 || !(train_rate_hz > 0.0) || !(intensity_fraction >= 0.0) ||
      trains < 1 || !(inter_train_wait_s >= 0.0) || !(pulse_frequency_hz > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "pulse train parameters must be positive");
  }
}

Vec3 wing_field(const CoilModel& coil, Wing wing, const Vec3& point) {
  coil.validate();
  if (!has_wing(coil, wing)) return Vec3::Zero();
  const Vec3 local = invert(coil.pose).apply(point);
  return coil.pose.apply_vector(local_wing_field(coil, wing, local));
}

Vec3 b_field(const CoilModel& coil, const Vec3& point) {
  return wing_field(coil, Wing::Plus, point) + wing_field(coil, Wing::Minus, point);
}

double flux_coefficient(const CoilModel& coil, const SensorModel& sensor, int axis,
                        QuadratureOrder order) {
  sensor.validate();
  if (order.radial < 1 || order.angular < 4) {
    throw Error(ErrorKind::InvalidArgument, "quadrature needs >= 1 radial and >= 4 angular nodes");
  }
  const Vec3 normal = sensor.axis_direction(axis);
  // In-plane basis: the two other local axes, in cyclic order.
  const Mat3& r = sensor.pose.rotation();
  constexpr std::array<std::array<int, 2>, 3> kPlane{{{0, 1}, {1, 2}, {2, 0}}};
  const auto& plane = kPlane[static_cast<std::size_t>(axis)];
  const Vec3 u = r.col(plane[0]);
  const Vec3 v = r.col(plane[1]);
  const Vec3& center = sensor.pose.translation();

  CoilModel unit = coil;
  unit.peak_current_a = 1.0;

  const Quadrature1D radial = gauss_legendre(order.radial);
  const double a = sensor.loop_radius_mm;
  const double dtheta = 2.0 * std::numbers::pi / order.angular;
  double flux = 0.0;  // T mm^2
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double rho = a * radial.nodes[i];
    const double ring_weight = radial.weights[i] * a * rho * dtheta;
    for (int j = 0; j < order.angular; ++j) {
      const double theta = dtheta * j;
      const Vec3 p = center + rho * (std::cos(theta) * u + std::sin(theta) * v);
      flux += ring_weight * b_field(unit, p).dot(normal);
    }
  }
  return flux * kMmToM * kMmToM * sensor.turns_per_axis;
}

InducedVoltage induced_voltage(const CoilModel& coil, const SensorModel& sensor,
                               const PulseTrain& train, QuadratureOrder order) {
  coil.validate();
  sensor.validate();
  train.validate();
  const double omega = 2.0 * std::numbers::pi * train.pulse_frequency_hz;
  const double current = train.intensity_fraction * coil.peak_current_a;

  InducedVoltage out;
  out.time_s.resize(kSamplesPerPulseCycle + 1);
  for (int i = 0; i <= kSamplesPerPulseCycle; ++i) {
    out.time_s[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / (kSamplesPerPulseCycle * train.pulse_frequency_hz);
  }
  for (int axis = 0; axis < sensor.axis_count(); ++axis) {
    const double k = flux_coefficient(coil, sensor, axis, order);
    AxisVoltage av;
    av.peak_to_peak_v = 2.0 * std::abs(k) * current * omega;
    av.emf_v.reserve(out.time_s.size());
    // EMF = -k dI/dt with I(t) = I0 sin(omega t).
    for (double t : out.time_s) av.emf_v.push_back(-k * current * omega * std::cos(omega * t));
    out.axes.push_back(std::move(av));
  }
  return out;
}

std::vector<SweepRow> displacement_sweep(const CoilModel& coil, const SensorModel& sensor,
                                         const PulseTrain& train, const Vec3& direction,
                                         std::span<const double> offsets_mm,
                                         QuadratureOrder order) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "sweep direction must be a unit vector");
  }
  for (std::size_t i = 0; i < offsets_mm.size(); ++i) {
    if (!(offsets_mm[i] >= 0.0) || (i > 0 && !(offsets_mm[i] > offsets_mm[i - 1]))) {
      throw Error(ErrorKind::InvalidArgument, "offsets must ascend from 0");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(offsets_mm.size());
  for (double offset : offsets_mm) {
    SensorModel moved = sensor;
    moved.pose = RigidTransform::from_translation(offset * direction) * sensor.pose;
    const InducedVoltage v = induced_voltage(coil, moved, train, order);
    SweepRow row;
    row.offset_mm = offset;
    for (std::size_t a = 0; a < v.axes.size(); ++a)
      row.peak_to_peak_v[a] = v.axes[a].peak_to_peak_v;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "offset_mm,primary_vpp,secondary1_vpp,secondary2_vpp\n";
  for (const auto& row : rows) {
    out << format_double(row.offset_mm);
    for (double v : row.peak_to_peak_v) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "offset_mm,primary_vpp,secondary1_vpp,secondary2_vpp") {
    throw Error(ErrorKind::ParseError, "unexpected sweep CSV header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::array<double, 4> values{};
    for (std::size_t i = 0; i < 4; ++i) {
      if (!std::getline(ss, cell, ',')) throw Error(ErrorKind::ParseError, "short sweep CSV row");
      values[i] = parse_double(cell);
    }
    rows.push_back({values[0], {values[1], values[2], values[3]}});
  }
  return rows;
}

}  // namespace tmsnav
