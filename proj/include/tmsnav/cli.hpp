#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tmsnav/fieldsim.hpp"
#include "tmsnav/json_io.hpp"
#include "tmsnav/mesh.hpp"
#include "tmsnav/registration.hpp"

namespace tmsnav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitRejected = 2;
inline constexpr int kExitUsage = 64;

SensorModel default_sensor();

/// Project file. Relative paths resolve against the directory holding the file.
/// Meshes and landmarks are loaded eagerly so a bad reference fails at load time.
struct ProjectConfig {
  std::filesystem::path base_dir;
  std::optional<std::filesystem::path> skin_mesh_path;
  std::optional<std::filesystem::path> cortex_mesh_path;
  std::optional<std::filesystem::path> landmarks_path;
  std::optional<TriangleMesh> skin;
  std::optional<TriangleMesh> cortex;
  std::optional<LandmarkSet> landmarks;
  RigidTransform ee_marker;    // {E->Cr}
  RigidTransform marker_coil;  // {Cr->C}
  IcpConfig icp;
  CoilModel coil;
  /// Sensor pose relative to the reference coil frame (the planned coil pose in
  /// sessions and hotspot scoring, the coil pose in sweeps). Default: 20 mm along
  /// the coil axis, beneath the coil center.
  SensorModel sensor = default_sensor();
  PulseTrain train;
  std::filesystem::path output_dir = ".";
};

ProjectConfig project_config_from_json(const Json& j, const std::filesystem::path& base_dir);
ProjectConfig load_project_config(const std::filesystem::path& path);

/// Runs one command line. Output files go to `--out`, else the config's output_dir,
/// else the working directory. Returns one of the kExit* codes.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace tmsnav
