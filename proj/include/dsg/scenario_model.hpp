#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsg/geometry.hpp"

namespace dsg {

using Waypoint = Vec2;

/// Lane centerline; driving direction follows index order.
struct Centerline {
  std::vector<Waypoint> waypoints;

  bool operator==(const Centerline&) const = default;
};

/// Kinematic state of an agent: position (m), heading (rad, [-pi, pi)), speed (m/s).
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const AgentState&) const = default;
};

struct Agent {
  double length = 4.5;
  double width = 2.0;
  AgentState initial_state;
  /// Sampled at Scenario::dt; when present, trajectory[0] == initial_state.
  std::optional<std::vector<AgentState>> trajectory;

  bool operator==(const Agent&) const = default;
};

inline constexpr double kDefaultRange = 80.0;
inline constexpr double kDefaultVMax = 30.0;
inline constexpr double kDefaultDt = 0.1;

struct Scenario {
  std::vector<Centerline> lanes;
  std::vector<Agent> agents;
  double range = kDefaultRange;  ///< side of the square scene, meters
  double v_max = kDefaultVMax;   ///< speed that saturates the agent channel
  double dt = kDefaultDt;        ///< trajectory timestep, seconds
  std::map<std::string, std::string> metadata;  ///< provenance, free-form

  bool operator==(const Scenario&) const = default;
};

/// Checks the structural invariants of every lane and agent. When
/// `require_in_range` is set, geometry must also lie within the centered
/// range square. Throws Error on the first violation.
void validate_scenario(const Scenario& s, bool require_in_range);

/// Centers the scene on the bounding box of its lane waypoints and clips it
/// to the range square: lanes are split where they leave the square and
/// agents outside are dropped. Idempotent.
Scenario normalize_scenario(const Scenario& s);

/// Clips a polyline to the axis-aligned square |x|,|y| <= half. Returns the
/// pieces that remain inside, each with at least two distinct points.
std::vector<Centerline> clip_to_square(const Centerline& c, double half);

/// One unit direction per waypoint: the direction of the outgoing segment,
/// with the last waypoint reusing the previous one.
std::vector<Vec2> polyline_directions(const Centerline& c);

}  // namespace dsg
