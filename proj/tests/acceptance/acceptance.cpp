// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "tmsnav/error.hpp"
#include "tmsnav/fieldsim.hpp"
#include "tmsnav/json_io.hpp"
#include "tmsnav/kinematics.hpp"
#include "tmsnav/pose_plan.hpp"
#include "tmsnav/registration.hpp"
#include "tmsnav/session_sim.hpp"
#include "tmsnav/stl_io.hpp"

using namespace tmsnav;
namespace fs = std::filesystem;
namespace tt = tmsnav::testing;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMu0 = 4e-7 * kPi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

LandmarkSet octahedron(double radius, double inflate_mm) {
  LandmarkSet l;
  l.names = {"nasion", "inion", "left_tragus", "right_tragus", "vertex", "chin"};
  const std::vector<Vec3> dirs{Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(-1, 0, 0),
                               Vec3(1, 0, 0), Vec3(0, 0, 1),  Vec3(0, 0, -1)};
  for (const Vec3& d : dirs) {
    l.image_points.push_back(radius * d);
    l.probe_points.push_back((radius + inflate_mm) * d);
  }
  return l;
}

Outcome registration_exactness() {
  Rng rng(101);
  const auto start = Clock::now();
  double worst_residual = 0.0;
  double worst_transform = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform() * 8.0);
    const RigidTransform truth = tt::random_transform(rng, 200.0);
    LandmarkSet l;
    for (int i = 0; i < n; ++i) {
      l.names.push_back("p" + std::to_string(i));
      const Vec3 probe = tt::random_point(rng, 100.0);
      l.probe_points.push_back(probe);
      l.image_points.push_back(truth.apply(probe));
    }
    const RegistrationResult r = pairpoint_register(l);
    worst_residual = std::max(worst_residual, *r.pairpoint_residual_mean);
    worst_transform = std::max(
        {worst_transform, (r.transform.rotation() - truth.rotation()).cwiseAbs().maxCoeff(),
         (r.transform.translation() - truth.translation()).cwiseAbs().maxCoeff()});
  }
  const double elapsed = seconds_since(start);
  return {worst_residual <= 1e-9 && elapsed < 5.0,
          "1000 trials, max residual " + fmt(worst_residual) + " mm, max transform error " +
              fmt(worst_transform) + ", " + fmt(elapsed) + " s"};
}

Outcome registration_gate() {
  bool ok = true;
  std::string detail = "pair-point";
  for (double offset : {5.999, 6.0, 6.001}) {
    const bool accepted = pairpoint_register(octahedron(80.0, offset)).accepted;
    ok = ok && accepted == (offset <= 6.0);
    detail += " " + fmt(offset) + (accepted ? ":accept" : ":reject");
  }
  const TriangleMesh sphere = tt::icosphere(80.0, 3);
  detail += "; ICP";
  for (double offset : {1.999, 2.0, 2.001}) {
    std::vector<Vec3> cloud;
    for (const Vec3& v : sphere.vertices()) cloud.push_back(v * ((80.0 + offset) / 80.0));
    const RegistrationResult r = icp_refine(sphere, cloud, RigidTransform{});
    // Vertices inflated radially stay exactly `offset` from the surface.
    const bool accepted = r.accepted;
    const bool expected = *r.icp_residual_mean <= 2.0;
    ok = ok && accepted == expected && std::abs(*r.icp_residual_mean - offset) <= 1e-9;
    if (offset != 2.0) ok = ok && accepted == (offset < 2.0);
    detail += " " + fmt(offset) + (accepted ? ":accept" : ":reject");
  }
  return {ok, detail};
}

Outcome pose_validity() {
  const TriangleMesh skin = tt::ellipsoid(Vec3(80, 95, 88), 96, 48);
  const TriangleMesh cortex = tt::ellipsoid(Vec3(65, 80, 72), 64, 32);
  Rng rng(303);
  double worst_orthonormal = 0.0;
  double worst_det = 0.0;
  double worst_on_skin = 0.0;
  int errors = 0;
  std::map<ErrorKind, int> error_kinds;
  const int invocations = 10000;
  for (int i = 0; i < invocations; ++i) {
    const auto strategy = static_cast<Strategy>(i % 3);
    const Vec3 dir = rng.unit_vector();
    const Vec3 tail = rng.unit_vector() * 5.0;
    PoseConstraintInput in;
    if (strategy == Strategy::FreeSkin) {
      const Vec3 near_skin =
          dir.cwiseProduct(Vec3(80, 95, 88)) * (1.0 + 0.05 * (rng.uniform() - 0.5));
      in = PoseConstraintInput::two_point(near_skin, near_skin + tail);
    } else {
      const Vec3 target = closest_point(cortex, dir.cwiseProduct(Vec3(65, 80, 72))).point;
      in = PoseConstraintInput::two_point(target, target + tail);
    }
    PlanPose pose;
    try {
      pose = plan(strategy, &cortex, skin, in);
    } catch (const Error& e) {
      ++errors;
      ++error_kinds[e.kind()];
      continue;
    }
    const Mat3 r = pose.pose.rotation();
    worst_orthonormal =
        std::max(worst_orthonormal, (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff());
    worst_det = std::max(worst_det, std::abs(r.determinant() - 1.0));
    if (strategy != Strategy::RestrictedCortex) {
      worst_on_skin =
          std::max(worst_on_skin, closest_point_exhaustive(skin, pose.center()).ray_parameter);
    }
  }
  std::string detail = std::to_string(invocations) + " invocations, orthonormality " +
                       fmt(worst_orthonormal) + ", det " + fmt(worst_det) +
                       ", max center-to-skin " + fmt(worst_on_skin) + " mm, errors " +
                       std::to_string(errors);
  for (const auto& [kind, count] : error_kinds) {
    detail += " " + std::string(to_string(kind)) + "=" + std::to_string(count);
  }
  return {errors == 0 && worst_orthonormal <= 1e-9 && worst_det <= 1e-9 && worst_on_skin <= 1e-6,
          detail};
}

Outcome chain_round_trip() {
  Rng rng(404);
  double worst_mm = 0.0;
  double worst_rad = 0.0;
  for (int i = 0; i < 1000; ++i) {
    FrameGraph g;
    g = g.with_edge(Frame::R, Frame::E, tt::random_transform(rng, 300.0), Provenance::Sensor, 0);
    g = g.with_edge(Frame::O, Frame::Cr, tt::random_transform(rng, 300.0), Provenance::Tracker, 0);
    g = g.with_edge(Frame::O, Frame::Hr, tt::random_transform(rng, 300.0), Provenance::Tracker, 0);
    g = g.with_edge(Frame::E, Frame::Cr, tt::random_transform(rng, 50.0), Provenance::Calibration);
    g = g.with_edge(Frame::Cr, Frame::C, tt::random_transform(rng, 50.0), Provenance::Calibration);
    g = g.with_edge(Frame::Hr, Frame::H, tt::random_transform(rng, 100.0),
                    Provenance::Registration);
    PlanPose planned;
    planned.pose = tt::random_transform(rng, 90.0);
    const RigidTransform commanded = solve_commanded_end_effector(g, planned);
    const PoseError e = pose_error(planned.pose * approach_flip(),
                                   chain(apply_command(g, commanded), Frame::H, Frame::C));
    worst_mm = std::max(worst_mm, e.translation_mm);
    worst_rad = std::max(worst_rad, e.rotation_rad);
  }
  return {worst_mm <= 1e-9 && worst_rad <= 1e-9,
          "1000 graphs, max " + fmt(worst_mm) + " mm, " + fmt(worst_rad) + " rad"};
}

Outcome field_oracle() {
  CoilModel coil;
  coil.layout = CoilLayout::SingleLoop;
  coil.segments_per_loop = 1024;
  const double radius = coil.loop_radius_mm * 1e-3;
  const double current = coil.peak_current_a * coil.turns;
  const auto start = Clock::now();
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double z_mm = 5.0 + 95.0 * k / 19.0;
    const double z = z_mm * 1e-3;
    const double expected =
        kMu0 * current * radius * radius / (2.0 * std::pow(radius * radius + z * z, 1.5));
    const double got = b_field(coil, Vec3(0, 0, z_mm)).norm();
    worst = std::max(worst, std::abs(got - expected) / expected);
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-3 && elapsed < 10.0,
          "20 standoffs 5-100 mm, max relative error " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome sweep_mechanism() {
  CoilModel coil;
  coil.layout = CoilLayout::SingleLoop;
  SensorModel sensor;
  sensor.pose = RigidTransform::from_translation(Vec3(0, 0, 20));
  std::vector<double> offsets;
  for (int k = 0; k <= 10; ++k) offsets.push_back(k);
  const auto rows = displacement_sweep(coil, sensor, PulseTrain{}, Vec3(1, 0, 0), offsets);
  bool primary_decreasing = true;
  bool secondary_increasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    primary_decreasing =
        primary_decreasing && rows[i].peak_to_peak_v[0] < rows[i - 1].peak_to_peak_v[0];
    // Axis 1 is the sensor's local x, the sweep direction.
    secondary_increasing =
        secondary_increasing && rows[i].peak_to_peak_v[1] > rows[i - 1].peak_to_peak_v[1];
  }
  return {primary_decreasing && secondary_increasing,
          "primary " + fmt(rows.front().peak_to_peak_v[0]) + " -> " +
              fmt(rows.back().peak_to_peak_v[0]) + " V (" +
              (primary_decreasing ? "strictly decreasing" : "not monotone") + "), secondary " +
              fmt(rows.front().peak_to_peak_v[1]) + " -> " + fmt(rows.back().peak_to_peak_v[1]) +
              " V (" + (secondary_increasing ? "strictly increasing" : "not monotone") + ")"};
}

Outcome stability_reproduction() {
  PlanPose planned;
  planned.pose = RigidTransform::from_translation(Vec3(0, 0, 85));
  const CoilModel coil;  // figure-8 defaults
  // 20 mm beneath the junction, primary axis turned onto coil x where the
  // figure-8 field is strongest.
  SensorModel sensor;
  sensor.pose = planned.pose * approach_flip() * RigidTransform::from_translation(Vec3(0, 0, 20)) *
                RigidTransform::from_axis_angle(Vec3::UnitY(), kPi / 2.0, Vec3::Zero());
  const PulseTrain train;

  double robotic_std = 0.0;
  double manual_std = 0.0;
  double robotic_mean = 0.0;
  double manual_mean = 0.0;
  int seeds_meeting_ratio = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto primary = [&](const ActuationModel& model) {
      for (const auto& s : summarize(run_holding_session(planned, model, coil, sensor, train))) {
        if (s.metric == "primary_vpp") return s;
      }
      throw Error(ErrorKind::InvalidArgument, "no primary_vpp row");
    };
    const MetricStats r = primary(ActuationModel::robotic(seed));
    const MetricStats m = primary(ActuationModel::manual(seed));
    robotic_std += r.std_dev / seeds;
    manual_std += m.std_dev / seeds;
    robotic_mean += r.mean / seeds;
    manual_mean += m.mean / seeds;
    if (10.0 * r.std_dev <= m.std_dev) ++seeds_meeting_ratio;
  }
  const double ratio = manual_std / robotic_std;
  return {ratio >= 10.0 && robotic_mean > manual_mean,
          "20 seeds, mean primary std robotic " + fmt(robotic_std) + " V, manual " +
              fmt(manual_std) + " V, ratio " + fmt(ratio) + " (need >= 10, " +
              std::to_string(seeds_meeting_ratio) + "/20 seeds individually), mean robotic " +
              fmt(robotic_mean) + " V vs manual " + fmt(manual_mean) + " V"};
}

std::string four_significant(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome pose_error_fixtures() {
  const RigidTransform planned = RigidTransform::from_translation(Vec3(10, -20, 85));
  const auto rotated = [&](double degrees) {
    const Vec3 axis = Vec3(1, 2, -0.5).normalized();
    return planned * RigidTransform::from_axis_angle(axis, degrees * kPi / 180.0, Vec3::Zero());
  };
  const double large = pose_error(planned, rotated(8.0)).rotation_rad;
  const double small = pose_error(planned, rotated(0.15)).rotation_rad;
  const bool ok = four_significant(large) == "1.396e-01" && four_significant(small) == "2.618e-03";
  return {ok, "8.0 deg -> " + four_significant(large) + " rad, 0.15 deg -> " +
                  four_significant(small) + " rad"};
}

int run_cli_process(const std::string& args, const fs::path& stdout_path) {
  const std::string cmd =
      std::string(TMSNAV_CLI_PATH) + " " + args + " > " + stdout_path.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs every command into `run`, each in its own subdirectory; returns the first
// failing step, or an empty string.
std::string run_all_commands(const fs::path& inputs, const fs::path& run) {
  const std::string config = "--config " + (inputs / "project.json").string();
  const auto step = [&](const std::string& name, const std::string& args) -> std::string {
    const fs::path dir = run / name;
    fs::create_directories(dir);
    const int code = run_cli_process(args + " --out " + dir.string(), dir / "stdout.txt");
    return code == 0 ? "" : name + " exited " + std::to_string(code);
  };
  const std::vector<std::pair<std::string, std::string>> steps{
      {"register", config + " register --cloud " + (inputs / "cloud.json").string()},
      {"plan_free_skin", config + " plan --strategy free_skin --constraint " +
                             (inputs / "skin_constraint.json").string()},
      {"plan_restricted_cortex", config + " plan --strategy restricted_cortex --constraint " +
                                     (inputs / "cortex_constraint.json").string()},
      {"plan_closest_skin", config + " plan --strategy closest_skin --constraint " +
                                (inputs / "cortex_constraint.json").string()},
      {"chain", config + " chain --graph " + (inputs / "graph.json").string() + " --plan " +
                    (run / "plan_restricted_cortex" / "plan.json").string() + " --registration " +
                    (run / "register" / "registration.json").string()},
      {"hotspot", config + " hotspot --rows 3 --cols 3 --spacing 5 --simulate --plan " +
                      (run / "plan_restricted_cortex" / "plan.json").string()},
      {"fieldsim", config + " fieldsim --max-offset 10 --step 1"},
      {"session_alignment", config + " --seed 42 session --kind alignment --model manual --plan " +
                                (run / "plan_restricted_cortex" / "plan.json").string()},
      {"session_holding", config + " --seed 42 session --kind holding --model manual --plan " +
                              (run / "plan_restricted_cortex" / "plan.json").string()},
      {"report", "report --session " + (run / "session_holding" / "session.json").string()},
  };
  for (const auto& [name, args] : steps) {
    if (std::string failure = step(name, args); !failure.empty()) return failure;
  }
  return "";
}

Outcome cli_determinism() {
  const fs::path root = tt::scratch_dir("acceptance_cli");
  const fs::path inputs = root / "inputs";
  fs::create_directories(inputs);
  save_ascii_stl(tt::uv_sphere(85.0, 96, 48), inputs / "skin.stl");
  save_ascii_stl(tt::uv_sphere(70.0, 64, 32), inputs / "cortex.stl");
  write_json_file(inputs / "landmarks.json", Json(octahedron(80.0, 0.5)));
  Json cfg = Json::object();
  cfg["skin_mesh"] = "skin.stl";
  cfg["cortex_mesh"] = "cortex.stl";
  cfg["landmarks"] = "landmarks.json";
  cfg["calibration"]["E_Cr"] = to_json_value(RigidTransform::from_translation(Vec3(0, 0, 120)));
  cfg["calibration"]["Cr_C"] = to_json_value(RigidTransform::from_translation(Vec3(5, 0, -30)));
  write_json_file(inputs / "project.json", cfg);
  write_json_file(inputs / "skin_constraint.json",
                  Json(PoseConstraintInput::two_point(Vec3(3, 4, 85), Vec3(3, 14, 85))));
  write_json_file(inputs / "cortex_constraint.json",
                  Json(PoseConstraintInput::two_point(Vec3(0, 0, 70), Vec3(0, 10, 70))));
  Rng rng(909);
  std::vector<Vec3> cloud;
  for (int i = 0; i < 200; ++i) {
    Vec3 d = rng.unit_vector();
    d.z() = std::abs(d.z());
    cloud.push_back(85.0 * d);
  }
  write_json_file(inputs / "cloud.json", point_cloud_to_json(cloud));
  FrameGraph g;
  g = g.with_edge(Frame::R, Frame::E, tt::random_transform(rng, 300.0), Provenance::Sensor, 1000);
  g = g.with_edge(Frame::O, Frame::Cr, tt::random_transform(rng, 300.0), Provenance::Tracker, 1010);
  g = g.with_edge(Frame::O, Frame::Hr, tt::random_transform(rng, 300.0), Provenance::Tracker, 1010);
  write_json_file(inputs / "graph.json", Json(g));

  // Both runs write to identically named directories so no path leaks into a diff.
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = root / "run";
    fs::remove_all(out);
    if (const std::string failure = run_all_commands(inputs, out); !failure.empty()) {
      return {false, failure};
    }
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
      if (entry.is_regular_file()) {
        files[fs::relative(entry.path(), out).string()] = slurp(entry.path());
      }
    }
    if (run == 0) {
      first = std::move(files);
      continue;
    }
    std::vector<std::string> differing;
    for (const auto& [name, content] : first) {
      const auto it = files.find(name);
      if (it == files.end() || it->second != content) differing.push_back(name);
    }
    if (files.size() != first.size() || !differing.empty()) {
      std::string detail = "outputs differ:";
      for (const auto& d : differing) detail += " " + d;
      return {false, detail};
    }
  }
  return {true, "10 commands, " + std::to_string(first.size()) +
                    " output files byte-identical across two runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"registration exactness", registration_exactness},
      {"registration gate", registration_gate},
      {"pose validity", pose_validity},
      {"chain round trip", chain_round_trip},
      {"field oracle", field_oracle},
      {"displacement sweep mechanism", sweep_mechanism},
      {"holding stability robotic vs manual", stability_reproduction},
      {"pose error metric fixtures", pose_error_fixtures},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << i + 1 << " " << (outcome.pass ? "PASS" : "FAIL") << " "
              << criteria[i].first << ": " << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
