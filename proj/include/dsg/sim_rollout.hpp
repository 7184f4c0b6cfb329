#pragma once

#include <optional>
#include <vector>

#include "dsg/agent_extractor.hpp"
#include "dsg/lane_vectorizer.hpp"

namespace dsg {

struct LaneAssignment {
  int edge = 0;               ///< index into LaneGraph::edges
  double arc_length = 0.0;    ///< station of the agent's projection on the edge
  double lateral = 0.0;       ///< distance to the edge, m
  double heading_error = 0.0; ///< |agent heading − lane heading|, rad
};

struct AssignConfig {
  double max_lateral = 5.0;               ///< m
  double max_heading_error = 60.0 * std::numbers::pi / 180.0;
  double heading_weight = 2.0;            ///< cost per radian of misalignment, m/rad
};

/// Edge minimizing lateral distance + heading_weight·misalignment, or none
/// when no edge passes both gates.
std::optional<LaneAssignment> assign_lane(Vec2 position, double heading, const LaneGraph& g,
                                          const AssignConfig& cfg = {});
std::optional<LaneAssignment> assign_lane(const AgentState& agent, const LaneGraph& g, const AssignConfig& cfg = {});
std::optional<LaneAssignment> assign_lane(const AgentDetection& agent, const LaneGraph& g,
                                          const AssignConfig& cfg = {});

struct JointFuture {
  /// One trajectory per scene agent, initial state first, sampled every dt.
  std::vector<std::vector<AgentState>> trajectories;
  /// Lane edges each agent follows, in order; empty for unassigned agents.
  std::vector<std::vector<int>> routes;
  /// Reference path each agent tracks, from its projection onward. Dead ends
  /// continue straight. Empty for unassigned agents.
  std::vector<std::vector<Vec2>> paths;
  double probability = 0.0;
  double dt = kDefaultDt;
};

struct RolloutConfig {
  int K = 3;
  double horizon = 8.0;  ///< s
  double dt = kDefaultDt;
  double lookahead = 2.0;  ///< pure-pursuit lookahead distance, m
  int substeps = 10;       ///< integration steps per dt
  AssignConfig assign;
};

/// Constant-speed lane following. Future k sends every agent that reaches a
/// branching vertex down its (k mod n)-th straightest out-edge; identical
/// futures are merged and the rest share probability uniformly. A scene
/// without agents yields K empty futures. HorizonTooShort if horizon < dt.
std::vector<JointFuture> rollout(const Scenario& scene, const LaneGraph& g, const RolloutConfig& cfg = {});

/// Copy of the scene with each agent's trajectory (and dt) taken from the future.
Scenario apply_future(const Scenario& scene, const JointFuture& future);

}  // namespace dsg
