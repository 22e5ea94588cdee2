#include "tmsnav/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tmsnav/error.hpp"
#include "tmsnav/format.hpp"
#include "tmsnav/kinematics.hpp"
#include "tmsnav/pose_plan.hpp"
#include "tmsnav/session_sim.hpp"
#include "tmsnav/stl_io.hpp"

namespace fs = std::filesystem;

namespace tmsnav {

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> optional_path(const Json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string())
    throw Error(ErrorKind::ParseError, std::string(key) + " must be a path");
  const fs::path p = resolve(base, j.at(key).get<std::string>());
  if (!fs::exists(p)) {
    throw Error(ErrorKind::InvalidArgument, std::string(key) + " not found: " + p.string());
  }
  return p;
}

double positive(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw Error(ErrorKind::ParseError, std::string(key) + " must be a number");
  const double v = j.at(key).get<double>();
  if (!(v > 0.0)) throw Error(ErrorKind::InvalidArgument, std::string(key) + " must be positive");
  return v;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidTransform:
    case ErrorKind::EmptyMesh:
    case ErrorKind::DegenerateTriangle:
    case ErrorKind::ParseError:
      return kExitUsage;
    default:
      return kExitRejected;
  }
}

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct Context {
  const GlobalOptions& global;
  std::optional<ProjectConfig> config;
  fs::path out_dir;

  const ProjectConfig& require_config() const {
    if (!config) throw Error(ErrorKind::InvalidArgument, "this command needs --config");
    return *config;
  }

  fs::path output(const std::string& name) const { return out_dir / name; }
};

Context make_context(const GlobalOptions& global) {
  Context ctx{global, std::nullopt, fs::path(".")};
  if (!global.config_path.empty()) {
    ctx.config = load_project_config(global.config_path);
    ctx.out_dir = ctx.config->output_dir;
  }
  if (!global.out_dir.empty()) ctx.out_dir = global.out_dir;
  fs::create_directories(ctx.out_dir);
  return ctx;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

template <typename T>
T read_as(const std::string& path) {
  try {
    return read_json_file(path).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

Vec3 vec3_from_list(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw Error(ErrorKind::InvalidArgument, std::string(what) + " needs 3 values");
  return Vec3(v[0], v[1], v[2]);
}

/// Sensor placed relative to a reference coil pose; the config holds the offset.
SensorModel sensor_under(const SensorModel& sensor, const RigidTransform& coil_pose) {
  SensorModel placed = sensor;
  placed.pose = coil_pose * sensor.pose;
  return placed;
}

int cmd_register(const Context& ctx, const std::string& cloud_path) {
  const ProjectConfig& cfg = ctx.require_config();
  if (!cfg.landmarks) throw Error(ErrorKind::InvalidArgument, "config has no landmarks file");
  RegistrationResult result = pairpoint_register(*cfg.landmarks, cfg.icp.thresholds);
  if (!cloud_path.empty()) {
    if (!cfg.skin) throw Error(ErrorKind::InvalidArgument, "ICP needs skin_mesh in the config");
    const auto cloud = point_cloud_from_json(read_json_file(cloud_path));
    result = icp_refine(*cfg.skin, cloud, result, cfg.icp);
  }
  write_json_file(ctx.output("registration.json"), Json(result));
  const FiducialReport fiducials = fiducial_residual_report(result, *cfg.landmarks);
  std::cout << "register: " << (result.accepted ? "accepted" : "rejected")
            << " pairpoint_mean_mm=" << format_double(result.pairpoint_residual_mean.value_or(0.0));
  if (result.icp_residual_mean) {
    std::cout << " icp_mean_mm=" << format_double(*result.icp_residual_mean)
              << " iterations=" << result.iterations;
  }
  std::cout << " fiducial_max_mm=" << format_double(fiducials.max_mm) << '\n';
  return result.accepted ? kExitOk : kExitRejected;
}

int cmd_plan(const Context& ctx, const std::string& strategy_name,
             const std::string& constraint_path) {
  const ProjectConfig& cfg = ctx.require_config();
  if (!cfg.skin) throw Error(ErrorKind::InvalidArgument, "plan needs skin_mesh in the config");
  const Strategy strategy = strategy_from_string(strategy_name);
  const auto input = read_as<PoseConstraintInput>(constraint_path);
  const TriangleMesh* cortex = cfg.cortex ? &*cfg.cortex : nullptr;
  if (strategy != Strategy::FreeSkin && !cortex) {
    throw Error(ErrorKind::InvalidArgument, "strategy " + strategy_name + " needs cortex_mesh");
  }
  const PlanPose pose = plan(strategy, cortex, *cfg.skin, input);
  write_json_file(ctx.output("plan.json"), Json(pose));
  const Vec3& c = pose.center();
  std::cout << "plan: " << strategy_name << " center=(" << format_double(c.x()) << ','
            << format_double(c.y()) << ',' << format_double(c.z()) << ')'
            << (pose.skin_collision_warning ? " warning=skin_collision" : "") << '\n';
  return kExitOk;
}

int cmd_chain(const Context& ctx, const std::string& graph_path, const std::string& plan_path,
              const std::string& registration_path, std::int64_t max_skew_ms) {
  const ProjectConfig& cfg = ctx.require_config();
  FrameGraph graph = read_as<FrameGraph>(graph_path);
  if (!graph.find(Frame::E, Frame::Cr)) {
    graph = graph.with_edge(Frame::E, Frame::Cr, cfg.ee_marker, Provenance::Calibration);
  }
  if (!graph.find(Frame::Cr, Frame::C)) {
    graph = graph.with_edge(Frame::Cr, Frame::C, cfg.marker_coil, Provenance::Calibration);
  }
  if (!registration_path.empty()) {
    const auto reg = read_as<RegistrationResult>(registration_path);
    if (!reg.accepted) {
      std::cerr << "error: registration was rejected\n";
      return kExitRejected;
    }
    graph = graph.with_replaced_edge(
        FrameEdge{Frame::Hr, Frame::H, invert(reg.transform), Provenance::Registration, {}});
  }
  const auto planned = read_as<PlanPose>(plan_path);
  CommandOptions options;
  options.max_snapshot_skew_ms = max_skew_ms;
  const RigidTransform commanded = solve_commanded_end_effector(graph, planned, options);
  const FrameGraph reached = apply_command(graph, commanded);
  const PoseError residual =
      pose_error(planned.pose * approach_flip(), chain(reached, Frame::H, Frame::C));

  Json out = Json::object();
  out["commanded_end_effector"] = to_json_value(commanded);
  out["coil_pose_residual"] = residual;
  out["graph"] = reached;
  write_json_file(ctx.output("chain.json"), out);
  std::cout << "chain: residual_mm=" << format_double(residual.translation_mm)
            << " residual_rad=" << format_double(residual.rotation_rad) << '\n';
  return kExitOk;
}

int cmd_hotspot(const Context& ctx, const std::string& plan_path, std::size_t rows,
                std::size_t cols, double spacing, const std::string& responses_path,
                bool simulate) {
  const ProjectConfig& cfg = ctx.require_config();
  if (!cfg.skin) throw Error(ErrorKind::InvalidArgument, "hotspot needs skin_mesh in the config");
  const auto seed = read_as<PlanPose>(plan_path);
  const HotspotGrid grid = hotspot_grid(*cfg.skin, seed, rows, cols, spacing);

  std::optional<std::vector<double>> responses;
  if (!responses_path.empty()) {
    responses = read_as<std::vector<double>>(responses_path);
  } else if (simulate) {
    const SensorModel sensor = sensor_under(cfg.sensor, seed.pose * approach_flip());
    responses.emplace();
    for (const auto& p : grid.poses) {
      CoilModel coil = cfg.coil;
      coil.pose = p.pose * approach_flip();
      responses->push_back(induced_voltage(coil, sensor, cfg.train).axes.front().peak_to_peak_v);
    }
  }

  Json out = Json::object();
  out["grid"] = grid;
  if (responses) {
    const HotspotSelection best = select_hotspot(grid, *responses);
    out["responses"] = *responses;
    out["selected_index"] = best.index;
    write_json_file(ctx.output("hotspot.json"), out);
    std::cout << "hotspot: " << rows << 'x' << cols << " selected=" << best.index << '\n';
  } else {
    write_json_file(ctx.output("hotspot.json"), out);
    std::cout << "hotspot: " << rows << 'x' << cols << " poses=" << grid.poses.size() << '\n';
  }
  return kExitOk;
}

int cmd_fieldsim(const Context& ctx, const std::vector<double>& direction,
                 std::vector<double> offsets, double max_offset, double step) {
  const ProjectConfig defaults;
  const ProjectConfig& cfg = ctx.config ? *ctx.config : defaults;
  if (offsets.empty()) {
    if (!(step > 0.0) || !(max_offset >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "--step must be positive and --max-offset >= 0");
    }
    const auto n = static_cast<long>(std::floor(max_offset / step + 1e-9));
    for (long k = 0; k <= n; ++k) offsets.push_back(static_cast<double>(k) * step);
  }
  const SensorModel sensor = sensor_under(cfg.sensor, cfg.coil.pose);
  const auto rows = displacement_sweep(cfg.coil, sensor, cfg.train,
                                       vec3_from_list(direction, "--direction"), offsets);
  std::ostringstream csv;
  write_sweep_csv(rows, csv);
  write_text(ctx.output("fieldsim_sweep.csv"), csv.str());
  std::cout << "fieldsim: rows=" << rows.size()
            << " primary_vpp_first=" << format_double(rows.front().peak_to_peak_v[0])
            << " primary_vpp_last=" << format_double(rows.back().peak_to_peak_v[0]) << '\n';
  return kExitOk;
}

ActuationModel model_from_name(const std::string& name, std::uint64_t seed) {
  if (name == "robotic") return ActuationModel::robotic(seed);
  if (name == "manual") return ActuationModel::manual(seed);
  if (name == "zero") return ActuationModel::zero_noise(seed);
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + name + "'");
}

void print_stats(const std::vector<MetricStats>& stats) {
  for (const auto& s : stats) {
    std::cout << "  " << s.metric << " mean=" << format_double(s.mean)
              << " std=" << format_double(s.std_dev) << '\n';
  }
}

int cmd_session(const Context& ctx, const std::string& kind_name, const std::string& model_name,
                const std::string& plan_path, int repetitions) {
  const SessionKind kind = session_kind_from_string(kind_name);
  const ActuationModel model = model_from_name(model_name, ctx.global.seed);
  const auto planned = read_as<PlanPose>(plan_path);
  SessionRecord record;
  if (kind == SessionKind::Alignment) {
    record = run_alignment_trials(planned, model, repetitions);
  } else {
    const ProjectConfig defaults;
    const ProjectConfig& cfg = ctx.config ? *ctx.config : defaults;
    const SensorModel sensor = sensor_under(cfg.sensor, planned.pose * approach_flip());
    record = run_holding_session(planned, model, cfg.coil, sensor, cfg.train);
  }
  const auto stats = summarize(record);
  write_json_file(ctx.output("session.json"), Json(record));
  std::ostringstream csv;
  write_summary_csv(stats, csv);
  write_text(ctx.output("session_summary.csv"), csv.str());
  if (kind == SessionKind::Holding) {
    std::ostringstream svg;
    write_voltage_svg(record, svg);
    write_text(ctx.output("session_voltage.svg"), svg.str());
  }
  std::cout << "session: " << kind_name << ' ' << model_name << " samples=" << record.samples.size()
            << '\n';
  print_stats(stats);
  return kExitOk;
}

int cmd_report(const Context& ctx, const std::string& session_path) {
  const auto record = read_as<SessionRecord>(session_path);
  const auto stats = summarize(record);
  Json out = Json::object();
  out["kind"] = std::string(to_string(record.kind));
  out["model"] = std::string(to_string(record.model.label));
  out["metrics"] = stats;
  write_json_file(ctx.output("report.json"), out);
  std::cout << "report: " << to_string(record.kind) << ' ' << to_string(record.model.label)
            << " samples=" << record.samples.size() << '\n';
  print_stats(stats);
  return kExitOk;
}

}  // namespace

SensorModel default_sensor() {
  SensorModel s;
  s.pose = RigidTransform::from_translation(Vec3(0.0, 0.0, 20.0));
  return s;
}

ProjectConfig project_config_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "config must be a JSON object");
  ProjectConfig cfg;
  cfg.base_dir = base_dir;
  cfg.skin_mesh_path = optional_path(j, "skin_mesh", base_dir);
  cfg.cortex_mesh_path = optional_path(j, "cortex_mesh", base_dir);
  cfg.landmarks_path = optional_path(j, "landmarks", base_dir);
  if (cfg.skin_mesh_path) cfg.skin = load_ascii_stl(*cfg.skin_mesh_path);
  if (cfg.cortex_mesh_path) cfg.cortex = load_ascii_stl(*cfg.cortex_mesh_path);
  if (cfg.landmarks_path) {
    cfg.landmarks = read_json_file(*cfg.landmarks_path).get<LandmarkSet>();
    cfg.landmarks->validate();
  }

  if (j.contains("calibration")) {
    const Json& cal = j.at("calibration");
    if (cal.contains("E_Cr")) cfg.ee_marker = transform_from_json(cal.at("E_Cr"));
    if (cal.contains("Cr_C")) cfg.marker_coil = transform_from_json(cal.at("Cr_C"));
  }
  if (j.contains("thresholds")) {
    const Json& t = j.at("thresholds");
    cfg.icp.thresholds.pairpoint_mm = positive(t, "pairpoint_mm", cfg.icp.thresholds.pairpoint_mm);
    cfg.icp.thresholds.icp_mm = positive(t, "icp_mm", cfg.icp.thresholds.icp_mm);
  }
  if (j.contains("icp")) {
    const Json& icp = j.at("icp");
    cfg.icp.max_iterations =
        static_cast<int>(positive(icp, "max_iterations", cfg.icp.max_iterations));
    cfg.icp.convergence_delta_mm =
        positive(icp, "convergence_delta_mm", cfg.icp.convergence_delta_mm);
    if (icp.contains("trim_fraction")) {
      cfg.icp.trim_fraction = icp.at("trim_fraction").get<double>();
      if (!(cfg.icp.trim_fraction >= 0.0 && cfg.icp.trim_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "trim_fraction must be in [0, 1)");
      }
    }
  }
  if (j.contains("coil")) cfg.coil = j.at("coil").get<CoilModel>();
  if (j.contains("sensor")) {
    const Json& sensor = j.at("sensor");
    cfg.sensor = sensor.get<SensorModel>();
    if (!sensor.contains("pose")) cfg.sensor.pose = default_sensor().pose;
  }
  if (j.contains("train")) cfg.train = j.at("train").get<PulseTrain>();
  if (j.contains("output_dir"))
    cfg.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
  return cfg;
}

ProjectConfig load_project_config(const fs::path& path) {
  if (!fs::exists(path))
    throw Error(ErrorKind::InvalidArgument, "config not found: " + path.string());
  try {
    return project_config_from_json(read_json_file(path), path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Coil pose planning, registration, frame chain and field simulation tools",
               "tmsnav"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Project JSON (meshes, landmarks, calibration)");
  app.add_option("--seed", global.seed, "RNG seed for simulations")->capture_default_str();
  app.add_option("--out", global.out_dir, "Output directory (overrides the config's output_dir)");

  std::string cloud_path;
  auto* reg = app.add_subcommand("register", "Pair-point registration, optionally refined by ICP");
  reg->add_option("--cloud", cloud_path, "Probed skin points (JSON) for ICP refinement");

  std::string strategy;
  std::string constraint_path;
  auto* pl = app.add_subcommand("plan", "Plan a coil pose from surface constraints");
  pl->add_option("--strategy", strategy, "free_skin | restricted_cortex | closest_skin")
      ->required();
  pl->add_option("--constraint", constraint_path, "Constraint input JSON")->required();

  std::string graph_path;
  std::string plan_path;
  std::string registration_path;
  std::int64_t max_skew_ms = CommandOptions{}.max_snapshot_skew_ms;
  auto* ch = app.add_subcommand("chain", "Solve the commanded end-effector pose");
  ch->add_option("--graph", graph_path, "Frame graph JSON (sensor and tracker edges)")->required();
  ch->add_option("--plan", plan_path, "Plan pose JSON")->required();
  ch->add_option("--registration", registration_path, "Registration JSON supplying {Hr->H}");
  ch->add_option("--max-skew-ms", max_skew_ms, "Allowed snapshot timestamp spread")
      ->capture_default_str();

  std::size_t rows = 1;
  std::size_t cols = 1;
  double spacing = 5.0;
  std::string responses_path;
  bool simulate = false;
  auto* hs = app.add_subcommand("hotspot", "Hotspot grid around a seed pose");
  hs->add_option("--plan", plan_path, "Seed plan pose JSON")->required();
  hs->add_option("--rows", rows, "Grid rows")->capture_default_str();
  hs->add_option("--cols", cols, "Grid columns")->capture_default_str();
  hs->add_option("--spacing", spacing, "Grid spacing in mm")->capture_default_str();
  auto* resp_opt = hs->add_option("--responses", responses_path,
                                  "JSON array of measured responses, one per grid pose");
  hs->add_flag("--simulate", simulate, "Score grid poses by simulated primary-axis voltage")
      ->excludes(resp_opt);

  std::vector<double> direction{1.0, 0.0, 0.0};
  std::vector<double> offsets;
  double max_offset = 10.0;
  double step = 1.0;
  auto* fsim = app.add_subcommand("fieldsim", "Sensor displacement sweep under the coil");
  fsim->add_option("--direction", direction, "Unit sweep direction x y z")
      ->expected(3)
      ->capture_default_str();
  auto* off_opt = fsim->add_option("--offsets", offsets, "Explicit offsets in mm, ascending from 0")
                      ->delimiter(',');
  fsim->add_option("--max-offset", max_offset, "Largest offset in mm")
      ->capture_default_str()
      ->excludes(off_opt);
  fsim->add_option("--step", step, "Offset step in mm")->capture_default_str()->excludes(off_opt);

  std::string kind = "alignment";
  std::string model = "robotic";
  int repetitions = 10;
  auto* ses = app.add_subcommand("session", "Simulate alignment trials or a holding session");
  ses->add_option("--kind", kind, "alignment | holding")->capture_default_str();
  ses->add_option("--model", model, "robotic | manual | zero")->capture_default_str();
  ses->add_option("--plan", plan_path, "Plan pose JSON")->required();
  ses->add_option("--repetitions", repetitions, "Alignment repetitions")->capture_default_str();

  std::string session_path;
  auto* rep = app.add_subcommand("report", "Summary statistics of a session record");
  rep->add_option("--session", session_path, "Session JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Context ctx = make_context(global);
    if (*reg) return cmd_register(ctx, cloud_path);
    if (*pl) return cmd_plan(ctx, strategy, constraint_path);
    if (*ch) return cmd_chain(ctx, graph_path, plan_path, registration_path, max_skew_ms);
    if (*hs) return cmd_hotspot(ctx, plan_path, rows, cols, spacing, responses_path, simulate);
    if (*fsim) return cmd_fieldsim(ctx, direction, offsets, max_offset, step);
    if (*ses) return cmd_session(ctx, kind, model, plan_path, repetitions);
    if (*rep) return cmd_report(ctx, session_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"tmsnav"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tmsnav
