#include "tmsnav/session_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "tmsnav/error.hpp"
#include "tmsnav/format.hpp"

namespace tmsnav {

namespace {

constexpr std::array<std::string_view, 3> kVoltageMetrics{"primary_vpp", "secondary1_vpp",
                                                          "secondary2_vpp"};

}  // namespace

std::string_view to_string(ActuationLabel label) {
  return label == ActuationLabel::Robotic ? "robotic" : "manual";
}

ActuationLabel actuation_label_from_string(std::string_view s) {
  if (s == "robotic") return ActuationLabel::Robotic;
  if (s == "manual") return ActuationLabel::Manual;
  throw Error(ErrorKind::InvalidArgument, "unknown actuation label '" + std::string(s) + "'");
}

std::string_view to_string(SessionKind kind) {
  return kind == SessionKind::Alignment ? "alignment" : "holding";
}

SessionKind session_kind_from_string(std::string_view s) {
  if (s == "alignment") return SessionKind::Alignment;
  if (s == "holding") return SessionKind::Holding;
  throw Error(ErrorKind::InvalidArgument, "unknown session kind '" + std::string(s) + "'");
}

ActuationModel ActuationModel::robotic(std::uint64_t seed) {
  return {ActuationLabel::Robotic, 0.5, 2.5e-3, 0.0, seed};
}

ActuationModel ActuationModel::manual(std::uint64_t seed) {
  return {ActuationLabel::Manual, 1.0, 1.4e-1, 0.5, seed};
}

ActuationModel ActuationModel::zero_noise(std::uint64_t seed) {
  return {ActuationLabel::Robotic, 0.0, 0.0, 0.0, seed};
}

void ActuationModel::validate() const {
  if (!(translation_sigma_mm >= 0.0) || !(rotation_sigma_rad >= 0.0) ||
      !(drift_per_minute_mm >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "actuation sigmas must be >= 0");
  }
}

RigidTransform perturb_pose(const RigidTransform& planned, double translation_sigma_mm,
                            double rotation_sigma_rad, Rng& rng) {
  const Vec3 offset(rng.normal(), rng.normal(), rng.normal());
  const Vec3 axis = rng.unit_vector();
  const double angle = rotation_sigma_rad * rng.normal();
  const Mat3 tilt = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  return RigidTransform(planned.rotation() * tilt,
                        planned.translation() + translation_sigma_mm * offset);
}

SessionRecord run_alignment_trials(const PlanPose& plan, const ActuationModel& model,
                                   int repetitions) {
  model.validate();
  if (repetitions < 1) throw Error(ErrorKind::InvalidArgument, "repetitions must be >= 1");
  Rng rng(model.rng_seed);
  SessionRecord record;
  record.kind = SessionKind::Alignment;
  record.planned = plan;
  record.model = model;
  record.samples.reserve(static_cast<std::size_t>(repetitions));
  for (int k = 0; k < repetitions; ++k) {
    SessionSample s;
    s.timestamp_s = kAlignmentIntervalS * k;
    s.measured = perturb_pose(plan.pose, model.translation_sigma_mm, model.rotation_sigma_rad, rng);
    s.error = pose_error(plan.pose, s.measured);
    record.samples.push_back(std::move(s));
  }
  return record;
}

SessionRecord run_holding_session(const PlanPose& plan, const ActuationModel& model,
                                  const CoilModel& coil, const SensorModel& sensor,
                                  const PulseTrain& train) {
  model.validate();
  coil.validate();
  sensor.validate();
  train.validate();
  Rng rng(model.rng_seed);
  SessionRecord record;
  record.kind = SessionKind::Holding;
  record.planned = plan;
  record.model = model;

  const double period = train.train_period_s();
  const double drift_step = model.drift_per_minute_mm * std::sqrt(period / 60.0);
  Vec3 drift = Vec3::Zero();
  for (int k = 0; k < train.trains; ++k) {
    if (k > 0) drift += drift_step * (rng.normal() * plan.x_axis() + rng.normal() * plan.y_axis());
    const RigidTransform placed =
        perturb_pose(plan.pose, model.translation_sigma_mm, model.rotation_sigma_rad, rng);
    SessionSample s;
    s.timestamp_s = period * k;
    s.measured = RigidTransform::from_translation(drift) * placed;
    s.error = pose_error(plan.pose, s.measured);
    CoilModel held = coil;
    held.pose = s.measured * approach_flip();
    for (const auto& axis : induced_voltage(held, sensor, train).axes) {
      s.voltages_vpp.push_back(axis.peak_to_peak_v);
    }
    record.samples.push_back(std::move(s));
  }
  return record;
}

void RunningStats::add(double x) {
  ++n_;
  if (n_ == 1) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

MetricStats RunningStats::finish(std::string metric) const {
  if (n_ == 0) throw Error(ErrorKind::InvalidArgument, "no values for " + metric);
  MetricStats s;
  s.metric = std::move(metric);
  s.count = n_;
  s.mean = mean_;
  s.std_dev = n_ > 1 ? std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_ - 1))) : 0.0;
  s.min = min_;
  s.max = max_;
  return s;
}

std::vector<MetricStats> summarize(const SessionRecord& record) {
  if (record.samples.empty()) throw Error(ErrorKind::InvalidArgument, "empty session record");
  RunningStats translation;
  RunningStats rotation;
  const std::size_t axes = record.samples.front().voltages_vpp.size();
  if (axes > kVoltageMetrics.size()) {
    throw Error(ErrorKind::InvalidArgument, "at most 3 voltage axes are supported");
  }
  std::vector<RunningStats> voltages(axes);
  for (const auto& s : record.samples) {
    translation.add(s.error.translation_mm);
    rotation.add(s.error.rotation_rad);
    if (s.voltages_vpp.size() != axes) {
      throw Error(ErrorKind::InvalidArgument, "inconsistent voltage axis count");
    }
    for (std::size_t a = 0; a < axes; ++a) voltages[a].add(s.voltages_vpp[a]);
  }
  std::vector<MetricStats> out{translation.finish("translation_error_mm"),
                               rotation.finish("rotation_error_rad")};
  for (std::size_t a = 0; a < axes; ++a) {
    out.push_back(voltages[a].finish(std::string(kVoltageMetrics[a])));
  }
  return out;
}

void write_summary_csv(const std::vector<MetricStats>& stats, std::ostream& out) {
  out << "metric,count,mean,std,min,max\n";
  for (const auto& s : stats) {
    out << s.metric << ',' << s.count << ',' << format_double(s.mean) << ','
        << format_double(s.std_dev) << ',' << format_double(s.min) << ',' << format_double(s.max)
        << '\n';
  }
}

std::vector<MetricStats> read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "metric,count,mean,std,min,max") {
    throw Error(ErrorKind::ParseError, "unexpected summary CSV header");
  }
  std::vector<MetricStats> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw Error(ErrorKind::ParseError, "summary CSV row needs 6 cells");
    MetricStats s;
    s.metric = cells[0];
    s.count = static_cast<std::size_t>(parse_double(cells[1]));
    s.mean = parse_double(cells[2]);
    s.std_dev = parse_double(cells[3]);
    s.min = parse_double(cells[4]);
    s.max = parse_double(cells[5]);
    out.push_back(std::move(s));
  }
  return out;
}

void write_voltage_svg(const SessionRecord& record, std::ostream& out) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 360.0;
  constexpr double kMargin = 40.0;
  constexpr std::array<std::string_view, 3> kColors{"#1f77b4", "#d62728", "#2ca02c"};

  double t_max = 0.0;
  double v_max = 0.0;
  for (const auto& s : record.samples) {
    t_max = std::max(t_max, s.timestamp_s);
    for (double v : s.voltages_vpp) v_max = std::max(v_max, v);
  }
  if (t_max <= 0.0) t_max = 1.0;
  if (v_max <= 0.0) v_max = 1.0;
  const auto px = [&](double t) { return kMargin + (kWidth - 2 * kMargin) * t / t_max; };
  const auto py = [&](double v) { return kHeight - kMargin - (kHeight - 2 * kMargin) * v / v_max; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
      << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">time (s)</text>\n";
  out << "<text x=\"12\" y=\"" << kMargin - 12 << "\" font-size=\"12\">peak-to-peak (V), max "
      << format_double(v_max) << "</text>\n";

  const std::size_t axes = record.samples.empty() ? 0 : record.samples.front().voltages_vpp.size();
  for (std::size_t a = 0; a < axes; ++a) {
    out << "<polyline fill=\"none\" stroke=\"" << kColors[a] << "\" points=\"";
    for (std::size_t i = 0; i < record.samples.size(); ++i) {
      const auto& s = record.samples[i];
      if (i > 0) out << ' ';
      out << format_double(std::round(px(s.timestamp_s) * 100.0) / 100.0) << ','
          << format_double(std::round(py(s.voltages_vpp[a]) * 100.0) / 100.0);
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kMargin - 110 << "\" y=\"" << kMargin + 16.0 * a
        << "\" font-size=\"12\" fill=\"" << kColors[a] << "\">" << kVoltageMetrics[a]
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace tmsnav
