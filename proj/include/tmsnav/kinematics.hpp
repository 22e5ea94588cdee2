#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "tmsnav/geometry.hpp"
#include "tmsnav/pose_plan.hpp"

namespace tmsnav {

/// Frames of the navigation chain: robot base, end-effector, coil center, coil
/// marker, optical tracker, head image, head marker, and the planned pose.
enum class Frame { R, E, C, Cr, O, H, Hr, b };

enum class Provenance { Sensor, Tracker, Calibration, Registration, Plan };

std::string_view to_string(Frame frame);
std::string_view to_string(Provenance provenance);
Frame frame_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);

/// The directed edges a graph may store:
/// {R->E}, {O->Cr}, {O->Hr}, {E->Cr}, {Cr->C}, {Hr->H}, {H->b}.
const std::vector<std::pair<Frame, Frame>>& chain_edges();

struct FrameEdge {
  Frame from = Frame::R;
  Frame to = Frame::E;
  RigidTransform transform;  // pose of `to` in `from`
  Provenance provenance = Provenance::Calibration;
  std::optional<std::int64_t> timestamp_ms;

  bool operator==(const FrameEdge&) const = default;
};

/// Immutable snapshot of the chain. `with_edge` returns a new snapshot.
class FrameGraph {
 public:
  FrameGraph() = default;

  /// Throws InvalidArgument for edges outside the chain or stored twice.
  FrameGraph with_edge(FrameEdge edge) const;
  FrameGraph with_edge(Frame from, Frame to, const RigidTransform& t, Provenance provenance,
                       std::optional<std::int64_t> timestamp_ms = std::nullopt) const;
  /// Same as with_edge but replaces an existing edge.
  FrameGraph with_replaced_edge(FrameEdge edge) const;

  const FrameEdge* find(Frame from, Frame to) const;
  std::vector<FrameEdge> edges() const;  // in chain_edges() order

  bool operator==(const FrameGraph&) const = default;

 private:
  std::map<std::pair<Frame, Frame>, FrameEdge> edges_;
};

/// {from->to} composed along the unique path of the chain; MissingEdge names the
/// first absent edge on the path.
RigidTransform chain(const FrameGraph& graph, Frame from, Frame to);

/// 180 degree turn about x: takes the plan's outward z to the coil's into-the-head z.
RigidTransform approach_flip();

struct CommandOptions {
  /// Maximum spread between sensor/tracker edge timestamps.
  std::int64_t max_snapshot_skew_ms = 50;
};

/// Desired {R->E*} that puts the coil frame C on the plan (with the approach flip).
RigidTransform solve_commanded_end_effector(const FrameGraph& graph, const PlanPose& plan,
                                            const CommandOptions& options = {});

/// The same snapshot after the robot reached `commanded` with everything else
/// rigid: {R->E} replaced and the coil marker edge {O->Cr} re-derived.
FrameGraph apply_command(const FrameGraph& graph, const RigidTransform& commanded);

struct PoseError {
  double translation_mm = 0.0;
  double rotation_rad = 0.0;
  /// Translation error expressed in the planned pose's frame.
  Vec3 translation_components_mm = Vec3::Zero();

  bool operator==(const PoseError&) const = default;
};

PoseError pose_error(const RigidTransform& planned, const RigidTransform& measured);

}  // namespace tmsnav
