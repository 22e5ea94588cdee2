#include "tmsnav/kinematics.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "tmsnav/error.hpp"

namespace tmsnav {

namespace {

constexpr std::array<Frame, 8> kFrames{Frame::R, Frame::E, Frame::C,  Frame::Cr,
                                       Frame::O, Frame::H, Frame::Hr, Frame::b};

std::string edge_name(Frame from, Frame to) {
  return "{" + std::string(to_string(from)) + "->" + std::string(to_string(to)) + "}";
}

bool is_chain_edge(Frame from, Frame to) {
  const auto& edges = chain_edges();
  return std::find(edges.begin(), edges.end(), std::make_pair(from, to)) != edges.end();
}

// Path from -> to over the undirected chain tree, as a frame sequence.
std::vector<Frame> path_between(Frame from, Frame to) {
  std::map<Frame, Frame> parent;
  std::vector<Frame> queue{from};
  parent[from] = from;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Frame f = queue[head];
    if (f == to) break;
    for (const auto& [a, b] : chain_edges()) {
      const Frame next = (a == f) ? b : (b == f ? a : f);
      if (next == f || parent.contains(next)) continue;
      parent[next] = f;
      queue.push_back(next);
    }
  }
  std::vector<Frame> path{to};
  while (path.back() != from) path.push_back(parent.at(path.back()));
  std::reverse(path.begin(), path.end());
  return path;
}

const RigidTransform& require(const FrameGraph& graph, Frame from, Frame to) {
  const FrameEdge* e = graph.find(from, to);
  if (e == nullptr) throw Error(ErrorKind::MissingEdge, edge_name(from, to));
  return e->transform;
}

}  // namespace

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::R:
      return "R";
    case Frame::E:
      return "E";
    case Frame::C:
      return "C";
    case Frame::Cr:
      return "Cr";
    case Frame::O:
      return "O";
    case Frame::H:
      return "H";
    case Frame::Hr:
      return "Hr";
    case Frame::b:
      return "b";
  }
  return "?";
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::Sensor:
      return "sensor";
    case Provenance::Tracker:
      return "tracker";
    case Provenance::Calibration:
      return "calibration";
    case Provenance::Registration:
      return "registration";
    case Provenance::Plan:
      return "plan";
  }
  return "?";
}

Frame frame_from_string(std::string_view s) {
  for (Frame f : kFrames) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown frame '" + std::string(s) + "'");
}

Provenance provenance_from_string(std::string_view s) {
  for (Provenance p : {Provenance::Sensor, Provenance::Tracker, Provenance::Calibration,
                       Provenance::Registration, Provenance::Plan}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown provenance '" + std::string(s) + "'");
}

const std::vector<std::pair<Frame, Frame>>& chain_edges() {
  static const std::vector<std::pair<Frame, Frame>> edges{
      {Frame::R, Frame::E},  {Frame::O, Frame::Cr}, {Frame::O, Frame::Hr}, {Frame::E, Frame::Cr},
      {Frame::Cr, Frame::C}, {Frame::Hr, Frame::H}, {Frame::H, Frame::b}};
  return edges;
}

FrameGraph FrameGraph::with_edge(FrameEdge edge) const {
  if (find(edge.from, edge.to) != nullptr) {
    throw Error(ErrorKind::InvalidArgument, edge_name(edge.from, edge.to) + " is already stored");
  }
  return with_replaced_edge(std::move(edge));
}

FrameGraph FrameGraph::with_edge(Frame from, Frame to, const RigidTransform& t,
                                 Provenance provenance,
                                 std::optional<std::int64_t> timestamp_ms) const {
  return with_edge(FrameEdge{from, to, t, provenance, timestamp_ms});
}

FrameGraph FrameGraph::with_replaced_edge(FrameEdge edge) const {
  if (!is_chain_edge(edge.from, edge.to)) {
    throw Error(ErrorKind::InvalidArgument,
                edge_name(edge.from, edge.to) + " is not an edge of the navigation chain");
  }
  FrameGraph next = *this;
  const auto key = std::make_pair(edge.from, edge.to);
  next.edges_.insert_or_assign(key, std::move(edge));
  return next;
}

const FrameEdge* FrameGraph::find(Frame from, Frame to) const {
  const auto it = edges_.find({from, to});
  return it == edges_.end() ? nullptr : &it->second;
}

std::vector<FrameEdge> FrameGraph::edges() const {
  std::vector<FrameEdge> out;
  for (const auto& [from, to] : chain_edges()) {
    if (const FrameEdge* e = find(from, to)) out.push_back(*e);
  }
  return out;
}

RigidTransform chain(const FrameGraph& graph, Frame from, Frame to) {
  const std::vector<Frame> path = path_between(from, to);
  RigidTransform result;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Frame a = path[i];
    const Frame b = path[i + 1];
    if (is_chain_edge(a, b)) {
      result = result * require(graph, a, b);
    } else {
      result = result * invert(require(graph, b, a));
    }
  }
  return result;
}

RigidTransform approach_flip() {
  Mat3 r = Mat3::Identity();
  r(1, 1) = -1.0;
  r(2, 2) = -1.0;
  return RigidTransform(r, Vec3::Zero());
}

RigidTransform solve_commanded_end_effector(const FrameGraph& graph, const PlanPose& plan,
                                            const CommandOptions& options) {
  const RigidTransform& robot_ee = require(graph, Frame::R, Frame::E);
  const RigidTransform& ee_marker = require(graph, Frame::E, Frame::Cr);
  const RigidTransform& marker_coil = require(graph, Frame::Cr, Frame::C);
  const RigidTransform& tracker_marker = require(graph, Frame::O, Frame::Cr);
  const RigidTransform& tracker_head = require(graph, Frame::O, Frame::Hr);
  const RigidTransform& head_image = require(graph, Frame::Hr, Frame::H);

  std::optional<std::int64_t> earliest;
  std::optional<std::int64_t> latest;
  for (const auto& [from, to] : {std::pair{Frame::R, Frame::E}, std::pair{Frame::O, Frame::Cr},
                                 std::pair{Frame::O, Frame::Hr}}) {
    const auto stamp = graph.find(from, to)->timestamp_ms;
    if (!stamp) continue;
    earliest = earliest ? std::min(*earliest, *stamp) : *stamp;
    latest = latest ? std::max(*latest, *stamp) : *stamp;
  }
  if (earliest && *latest - *earliest > options.max_snapshot_skew_ms) {
    throw Error(ErrorKind::StaleSnapshot,
                "sensor/tracker timestamps differ by " + std::to_string(*latest - *earliest) +
                    " ms (bound " + std::to_string(options.max_snapshot_skew_ms) + " ms)");
  }

  const RigidTransform robot_tracker = robot_ee * ee_marker * invert(tracker_marker);
  const RigidTransform tracker_coil = tracker_head * head_image * plan.pose * approach_flip();
  return robot_tracker * tracker_coil * invert(marker_coil) * invert(ee_marker);
}

FrameGraph apply_command(const FrameGraph& graph, const RigidTransform& commanded) {
  const RigidTransform robot_tracker = chain(graph, Frame::R, Frame::O);
  const FrameEdge* ee = graph.find(Frame::R, Frame::E);
  const FrameEdge* marker = graph.find(Frame::O, Frame::Cr);
  FrameEdge new_ee = *ee;
  new_ee.transform = commanded;
  FrameEdge new_marker = *marker;
  new_marker.transform = invert(robot_tracker) * commanded * require(graph, Frame::E, Frame::Cr);
  return graph.with_replaced_edge(new_ee).with_replaced_edge(new_marker);
}

PoseError pose_error(const RigidTransform& planned, const RigidTransform& measured) {
  PoseError e;
  const Vec3 delta = measured.translation() - planned.translation();
  e.translation_mm = delta.norm();
  e.translation_components_mm = planned.rotation().transpose() * delta;
  e.rotation_rad = rotation_angle(planned.rotation().transpose() * measured.rotation());
  return e;
}

}  // namespace tmsnav
