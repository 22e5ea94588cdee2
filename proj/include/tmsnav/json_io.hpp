#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "tmsnav/fieldsim.hpp"
#include "tmsnav/kinematics.hpp"
#include "tmsnav/pose_plan.hpp"
#include "tmsnav/registration.hpp"
#include "tmsnav/session_sim.hpp"

namespace tmsnav {

using Json = nlohmann::ordered_json;

// Points are 3-arrays in millimeters. Transforms are 4x4 row-major nested arrays.
Json to_json_value(const Vec3& v);
Vec3 vec3_from_json(const Json& j);
Json to_json_value(const RigidTransform& t);
RigidTransform transform_from_json(const Json& j);

void to_json(Json& j, const PoseConstraintInput& in);
void from_json(const Json& j, PoseConstraintInput& in);

/// Rotation is stored as a row-major 9-array next to the center point.
void to_json(Json& j, const PlanPose& p);
void from_json(const Json& j, PlanPose& p);

void to_json(Json& j, const HotspotGrid& g);
void from_json(const Json& j, HotspotGrid& g);

void to_json(Json& j, const LandmarkSet& l);
void from_json(const Json& j, LandmarkSet& l);

void to_json(Json& j, const RegistrationResult& r);
void from_json(const Json& j, RegistrationResult& r);

void to_json(Json& j, const FiducialReport& r);

void to_json(Json& j, const FrameGraph& g);
void from_json(const Json& j, FrameGraph& g);

void to_json(Json& j, const PoseError& e);
void from_json(const Json& j, PoseError& e);

void to_json(Json& j, const CoilModel& c);
void from_json(const Json& j, CoilModel& c);
void to_json(Json& j, const SensorModel& s);
void from_json(const Json& j, SensorModel& s);
void to_json(Json& j, const PulseTrain& t);
void from_json(const Json& j, PulseTrain& t);

void to_json(Json& j, const ActuationModel& m);
void from_json(const Json& j, ActuationModel& m);
void to_json(Json& j, const SessionRecord& r);
void from_json(const Json& j, SessionRecord& r);
void to_json(Json& j, const MetricStats& s);
void from_json(const Json& j, MetricStats& s);

std::vector<Vec3> point_cloud_from_json(const Json& j);
Json point_cloud_to_json(const std::vector<Vec3>& points);

/// Reads a JSON document; throws ParseError with the file name on failure.
Json read_json_file(const std::filesystem::path& path);
/// Two-space indented text with a trailing newline.
std::string dump_json(const Json& j);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace tmsnav
