#include "tmsnav/json_io.hpp"

#include <fstream>
#include <sstream>

#include "tmsnav/error.hpp"

namespace tmsnav {

namespace {

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get_field<T>(j, key);
}

// Unknown names in a document are parse errors, not argument errors.
template <typename Parse>
auto parse_name(Parse parse, const std::string& s) {
  try {
    return parse(s);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidArgument) throw;
    throw Error(ErrorKind::ParseError, e.what());
  }
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <typename T>
Json optional_value(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

CoilLayout coil_layout_from_string(const std::string& s) {
  if (s == "figure8") return CoilLayout::Figure8;
  if (s == "single_loop") return CoilLayout::SingleLoop;
  throw Error(ErrorKind::ParseError, "unknown coil layout '" + s + "'");
}

SensorKind sensor_kind_from_string(const std::string& s) {
  if (s == "2d") return SensorKind::Sensor2D;
  if (s == "3d") return SensorKind::Sensor3D;
  throw Error(ErrorKind::ParseError, "unknown sensor kind '" + s + "'");
}

}  // namespace

Json to_json_value(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::ParseError, "expected a 3-array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    const auto& e = j.at(static_cast<std::size_t>(i));
    if (!e.is_number()) throw Error(ErrorKind::ParseError, "expected a number in a 3-array");
    v(i) = e.get<double>();
  }
  return v;
}

Json to_json_value(const RigidTransform& t) {
  const auto m = t.to_row_major();
  Json rows = Json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    rows.push_back(Json::array({m[4 * i], m[4 * i + 1], m[4 * i + 2], m[4 * i + 3]}));
  }
  return rows;
}

RigidTransform transform_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorKind::ParseError, "expected a 4x4 matrix");
  std::array<double, 16> m{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || row.size() != 4) {
      throw Error(ErrorKind::ParseError, "expected a 4x4 matrix");
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (!row.at(k).is_number()) throw Error(ErrorKind::ParseError, "non-numeric matrix entry");
      m[4 * i + k] = row.at(k).get<double>();
    }
  }
  return RigidTransform::from_row_major(m);
}

void to_json(Json& j, const PoseConstraintInput& in) {
  j = Json::object();
  j["constraint_kind"] = std::string(to_string(in.kind));
  switch (in.kind) {
    case ConstraintKind::FourPoint:
      j["center"] = to_json_value(in.center);
      j["plane_points"] =
          Json::array({to_json_value(in.p), to_json_value(in.p1), to_json_value(in.p2)});
      j["tail_selector"] = std::string(to_string(in.tail));
      break;
    case ConstraintKind::ThreePoint:
      j["plane_points"] =
          Json::array({to_json_value(in.p), to_json_value(in.p1), to_json_value(in.p2)});
      j["center_selector"] = std::string(to_string(in.center_point));
      j["tail_selector"] = std::string(to_string(in.tail));
      break;
    case ConstraintKind::TwoPoint:
      j["center"] = to_json_value(in.center);
      j["tail_point"] = to_json_value(in.tail_point);
      break;
  }
}

void from_json(const Json& j, PoseConstraintInput& in) {
  const auto kind =
      parse_name(constraint_kind_from_string, get_field<std::string>(j, "constraint_kind"));
  if (kind == ConstraintKind::TwoPoint) {
    in = PoseConstraintInput::two_point(vec3_from_json(field(j, "center")),
                                        vec3_from_json(field(j, "tail_point")));
    return;
  }
  const Json& plane = field(j, "plane_points");
  if (!plane.is_array() || plane.size() != 3) {
    throw Error(ErrorKind::ParseError, "plane_points must hold p, p1, p2");
  }
  const Vec3 p = vec3_from_json(plane.at(0));
  const Vec3 p1 = vec3_from_json(plane.at(1));
  const Vec3 p2 = vec3_from_json(plane.at(2));
  const PlanePoint tail =
      parse_name(plane_point_from_string, get_or<std::string>(j, "tail_selector", "p1"));
  if (kind == ConstraintKind::FourPoint) {
    in = PoseConstraintInput::four_point(vec3_from_json(field(j, "center")), p, p1, p2, tail);
  } else {
    in = PoseConstraintInput::three_point(
        p, p1, p2,
        parse_name(plane_point_from_string, get_field<std::string>(j, "center_selector")), tail);
  }
}

void to_json(Json& j, const PlanPose& p) {
  j = Json::object();
  j["strategy"] = p.strategy ? Json(std::string(to_string(*p.strategy))) : Json(nullptr);
  j["center"] = to_json_value(p.center());
  Json rotation = Json::array();
  const Mat3& r = p.pose.rotation();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) rotation.push_back(r(row, col));
  }
  j["rotation"] = rotation;
  j["source"] = p.source;
  j["cortex_target"] = p.cortex_target ? to_json_value(*p.cortex_target) : Json(nullptr);
  j["support_triangle"] = optional_value(p.support_triangle);
  j["skin_collision_warning"] = p.skin_collision_warning;
}

void from_json(const Json& j, PlanPose& p) {
  const Json& rotation = field(j, "rotation");
  if (!rotation.is_array() || rotation.size() != 9) {
    throw Error(ErrorKind::ParseError, "rotation must be a row-major 9-array");
  }
  Mat3 r;
  for (std::size_t i = 0; i < 9; ++i) {
    r(static_cast<int>(i / 3), static_cast<int>(i % 3)) = rotation.at(i).get<double>();
  }
  p.pose = RigidTransform(r, vec3_from_json(field(j, "center")));
  const auto strategy = get_or<std::string>(j, "strategy", "");
  p.strategy =
      strategy.empty() ? std::nullopt : std::optional(parse_name(strategy_from_string, strategy));
  p.source = field(j, "source").get<PoseConstraintInput>();
  p.cortex_target = std::nullopt;
  if (j.contains("cortex_target") && !j.at("cortex_target").is_null()) {
    p.cortex_target = vec3_from_json(j.at("cortex_target"));
  }
  p.support_triangle = std::nullopt;
  if (j.contains("support_triangle") && !j.at("support_triangle").is_null()) {
    p.support_triangle = j.at("support_triangle").get<std::uint32_t>();
  }
  p.skin_collision_warning = get_or<bool>(j, "skin_collision_warning", false);
}

void to_json(Json& j, const HotspotGrid& g) {
  j = Json::object();
  j["rows"] = g.rows;
  j["cols"] = g.cols;
  j["spacing_mm"] = g.spacing_mm;
  j["poses"] = g.poses;
}

void from_json(const Json& j, HotspotGrid& g) {
  g.rows = get_field<std::size_t>(j, "rows");
  g.cols = get_field<std::size_t>(j, "cols");
  g.spacing_mm = get_field<double>(j, "spacing_mm");
  g.poses = field(j, "poses").get<std::vector<PlanPose>>();
  if (g.poses.size() != g.rows * g.cols) {
    throw Error(ErrorKind::ParseError, "hotspot grid pose count does not match rows x cols");
  }
}

void to_json(Json& j, const LandmarkSet& l) {
  j = Json::object();
  j["names"] = l.names;
  j["image_points"] = point_cloud_to_json(l.image_points);
  j["probe_points"] = point_cloud_to_json(l.probe_points);
}

void from_json(const Json& j, LandmarkSet& l) {
  l.names = get_field<std::vector<std::string>>(j, "names");
  l.image_points = point_cloud_from_json(field(j, "image_points"));
  l.probe_points = point_cloud_from_json(field(j, "probe_points"));
}

void to_json(Json& j, const RegistrationResult& r) {
  j = Json::object();
  j["transform"] = to_json_value(r.transform);
  j["pairpoint_residual_mean_mm"] = optional_value(r.pairpoint_residual_mean);
  j["icp_residual_mean_mm"] = optional_value(r.icp_residual_mean);
  j["accepted"] = r.accepted;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["icp_residual_history_mm"] = r.icp_residual_history;
  j["landmark_names"] = r.landmark_names;
}

void from_json(const Json& j, RegistrationResult& r) {
  r.transform = transform_from_json(field(j, "transform"));
  r.pairpoint_residual_mean = std::nullopt;
  if (j.contains("pairpoint_residual_mean_mm") && !j.at("pairpoint_residual_mean_mm").is_null()) {
    r.pairpoint_residual_mean = j.at("pairpoint_residual_mean_mm").get<double>();
  }
  r.icp_residual_mean = std::nullopt;
  if (j.contains("icp_residual_mean_mm") && !j.at("icp_residual_mean_mm").is_null()) {
    r.icp_residual_mean = j.at("icp_residual_mean_mm").get<double>();
  }
  r.accepted = get_field<bool>(j, "accepted");
  r.converged = get_or<bool>(j, "converged", true);
  r.iterations = get_or<int>(j, "iterations", 0);
  r.icp_residual_history = get_or<std::vector<double>>(j, "icp_residual_history_mm", {});
  r.landmark_names = get_or<std::vector<std::string>>(j, "landmark_names", {});
}

void to_json(Json& j, const FiducialReport& r) {
  j = Json::object();
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"name", row.name}, {"distance_mm", row.distance_mm}});
  j["rows"] = rows;
  j["mean_mm"] = r.mean_mm;
  j["max_mm"] = r.max_mm;
}

void to_json(Json& j, const FrameGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    Json item = Json::object();
    item["from"] = std::string(to_string(e.from));
    item["to"] = std::string(to_string(e.to));
    item["matrix"] = to_json_value(e.transform);
    item["provenance"] = std::string(to_string(e.provenance));
    item["timestamp_ms"] = optional_value(e.timestamp_ms);
    edges.push_back(std::move(item));
  }
  j = Json::object();
  j["edges"] = edges;
}

void from_json(const Json& j, FrameGraph& g) {
  g = FrameGraph{};
  for (const auto& item : field(j, "edges")) {
    FrameEdge e;
    e.from = parse_name(frame_from_string, get_field<std::string>(item, "from"));
    e.to = parse_name(frame_from_string, get_field<std::string>(item, "to"));
    e.transform = transform_from_json(field(item, "matrix"));
    e.provenance = parse_name(provenance_from_string, get_field<std::string>(item, "provenance"));
    if (item.contains("timestamp_ms") && !item.at("timestamp_ms").is_null()) {
      e.timestamp_ms = item.at("timestamp_ms").get<std::int64_t>();
    }
    g = g.with_edge(std::move(e));
  }
}

void to_json(Json& j, const PoseError& e) {
  j = Json::object();
  j["translation_mm"] = e.translation_mm;
  j["rotation_rad"] = e.rotation_rad;
  j["translation_components_mm"] = to_json_value(e.translation_components_mm);
}

void from_json(const Json& j, PoseError& e) {
  e.translation_mm = get_field<double>(j, "translation_mm");
  e.rotation_rad = get_field<double>(j, "rotation_rad");
  e.translation_components_mm = vec3_from_json(field(j, "translation_components_mm"));
}

void to_json(Json& j, const CoilModel& c) {
  j = Json::object();
  j["layout"] = c.layout == CoilLayout::Figure8 ? "figure8" : "single_loop";
  j["loop_radius_mm"] = c.loop_radius_mm;
  j["turns"] = c.turns;
  j["wing_center_offset_mm"] = c.wing_center_offset_mm;
  j["segments_per_loop"] = c.segments_per_loop;
  j["peak_current_a"] = c.peak_current_a;
  j["pose"] = to_json_value(c.pose);
}

void from_json(const Json& j, CoilModel& c) {
  const CoilModel d;
  c.layout = coil_layout_from_string(get_or<std::string>(j, "layout", "figure8"));
  c.loop_radius_mm = get_or(j, "loop_radius_mm", d.loop_radius_mm);
  c.turns = get_or(j, "turns", d.turns);
  c.wing_center_offset_mm = get_or(j, "wing_center_offset_mm", d.wing_center_offset_mm);
  c.segments_per_loop = get_or(j, "segments_per_loop", d.segments_per_loop);
  c.peak_current_a = get_or(j, "peak_current_a", d.peak_current_a);
  c.pose = j.contains("pose") ? transform_from_json(j.at("pose")) : RigidTransform{};
  c.validate();
}

void to_json(Json& j, const SensorModel& s) {
  j = Json::object();
  j["kind"] = s.kind == SensorKind::Sensor3D ? "3d" : "2d";
  j["loop_radius_mm"] = s.loop_radius_mm;
  j["turns_per_axis"] = s.turns_per_axis;
  j["pose"] = to_json_value(s.pose);
}

void from_json(const Json& j, SensorModel& s) {
  const SensorModel d;
  s.kind = sensor_kind_from_string(get_or<std::string>(j, "kind", "3d"));
  s.loop_radius_mm = get_or(j, "loop_radius_mm", d.loop_radius_mm);
  s.turns_per_axis = get_or(j, "turns_per_axis", d.turns_per_axis);
  s.pose = j.contains("pose") ? transform_from_json(j.at("pose")) : RigidTransform{};
  s.validate();
}

void to_json(Json& j, const PulseTrain& t) {
  j = Json::object();
  j["pulses_per_train"] = t.pulses_per_train;
  j["train_rate_hz"] = t.train_rate_hz;
  j["intensity_fraction"] = t.intensity_fraction;
  j["trains"] = t.trains;
  j["inter_train_wait_s"] = t.inter_train_wait_s;
  j["pulse_frequency_hz"] = t.pulse_frequency_hz;
}

void from_json(const Json& j, PulseTrain& t) {
  const PulseTrain d;
  t.pulses_per_train = get_or(j, "pulses_per_train", d.pulses_per_train);
  t.train_rate_hz = get_or(j, "train_rate_hz", d.train_rate_hz);
  t.intensity_fraction = get_or(j, "intensity_fraction", d.intensity_fraction);
  t.trains = get_or(j, "trains", d.trains);
  t.inter_train_wait_s = get_or(j, "inter_train_wait_s", d.inter_train_wait_s);
  t.pulse_frequency_hz = get_or(j, "pulse_frequency_hz", d.pulse_frequency_hz);
  t.validate();
}

void to_json(Json& j, const ActuationModel& m) {
  j = Json::object();
  j["label"] = std::string(to_string(m.label));
  j["translation_sigma_mm"] = m.translation_sigma_mm;
  j["rotation_sigma_rad"] = m.rotation_sigma_rad;
  j["drift_per_minute_mm"] = m.drift_per_minute_mm;
  j["rng_seed"] = m.rng_seed;
}

void from_json(const Json& j, ActuationModel& m) {
  m.label = parse_name(actuation_label_from_string, get_field<std::string>(j, "label"));
  m.translation_sigma_mm = get_field<double>(j, "translation_sigma_mm");
  m.rotation_sigma_rad = get_field<double>(j, "rotation_sigma_rad");
  m.drift_per_minute_mm = get_field<double>(j, "drift_per_minute_mm");
  m.rng_seed = get_field<std::uint64_t>(j, "rng_seed");
  m.validate();
}

void to_json(Json& j, const SessionRecord& r) {
  j = Json::object();
  j["kind"] = std::string(to_string(r.kind));
  j["planned"] = r.planned;
  j["model"] = r.model;
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    Json item = Json::object();
    item["timestamp_s"] = s.timestamp_s;
    item["measured"] = to_json_value(s.measured);
    item["error"] = s.error;
    if (!s.voltages_vpp.empty()) item["voltages_vpp"] = s.voltages_vpp;
    samples.push_back(std::move(item));
  }
  j["samples"] = samples;
}

void from_json(const Json& j, SessionRecord& r) {
  r.kind = parse_name(session_kind_from_string, get_field<std::string>(j, "kind"));
  r.planned = field(j, "planned").get<PlanPose>();
  r.model = field(j, "model").get<ActuationModel>();
  r.samples.clear();
  double previous = -1.0;
  for (const auto& item : field(j, "samples")) {
    SessionSample s;
    s.timestamp_s = get_field<double>(item, "timestamp_s");
    if (!r.samples.empty() && !(s.timestamp_s > previous)) {
      throw Error(ErrorKind::ParseError, "session timestamps must increase strictly");
    }
    previous = s.timestamp_s;
    s.measured = transform_from_json(field(item, "measured"));
    s.error = field(item, "error").get<PoseError>();
    s.voltages_vpp = get_or<std::vector<double>>(item, "voltages_vpp", {});
    r.samples.push_back(std::move(s));
  }
}

void to_json(Json& j, const MetricStats& s) {
  j = Json::object();
  j["metric"] = s.metric;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["std"] = s.std_dev;
  j["min"] = s.min;
  j["max"] = s.max;
}

void from_json(const Json& j, MetricStats& s) {
  s.metric = get_field<std::string>(j, "metric");
  s.count = get_field<std::size_t>(j, "count");
  s.mean = get_field<double>(j, "mean");
  s.std_dev = get_field<double>(j, "std");
  s.min = get_field<double>(j, "min");
  s.max = get_field<double>(j, "max");
}

std::vector<Vec3> point_cloud_from_json(const Json& j) {
  const Json& points = j.is_object() ? field(j, "points") : j;
  if (!points.is_array()) throw Error(ErrorKind::ParseError, "expected an array of points");
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(vec3_from_json(p));
  return out;
}

Json point_cloud_to_json(const std::vector<Vec3>& points) {
  Json out = Json::array();
  for (const auto& p : points) out.push_back(to_json_value(p));
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << dump_json(j);
}

}  // namespace tmsnav
