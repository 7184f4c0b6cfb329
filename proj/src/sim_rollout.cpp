#include "dsg/sim_rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsg/error.hpp"

namespace dsg {
namespace {

Vec2 end_direction(const Centerline& c) { return polyline_directions(c).back(); }

// Out-edges of v ordered by how little they turn relative to `heading`.
std::vector<int> straightest_first(const LaneGraph& g, int v, Vec2 heading) {
  auto out = g.out_edges(v);
  std::vector<std::pair<double, int>> keyed;
  for (int e : out) keyed.emplace_back(std::abs(angle_between(heading, end_direction(g.edges[e].geometry))), e);
  std::sort(keyed.begin(), keyed.end());
  out.clear();
  for (const auto& [turn, e] : keyed) out.push_back(e);
  return out;
}

struct Route {
  std::vector<int> edges;
  std::vector<Vec2> path;
};

// Lane path ahead of an assignment, long enough to cover `needed` meters.
// Dead ends continue straight along the last lane direction.
Route plan_route(const LaneGraph& g, const LaneAssignment& a, int choice, double needed) {
  Route r;
  r.edges.push_back(a.edge);
  const auto& first = g.edges[a.edge].geometry.waypoints;
  r.path = split_polyline(first, a.arc_length).second;
  double length = polyline_length(r.path);
  int edge = a.edge;
  while (length < needed) {
    const Vec2 heading = end_direction(g.edges[edge].geometry);
    const auto options = straightest_first(g, g.edges[edge].to, heading);
    if (options.empty() || r.edges.size() > 64) {
      r.path.push_back(r.path.back() + heading * (needed - length + 1.0));
      break;
    }
    edge = options[static_cast<std::size_t>(choice) % options.size()];
    r.edges.push_back(edge);
    const auto& pts = g.edges[edge].geometry.waypoints;
    for (const auto& p : pts)
      if (distance(r.path.back(), p) > 1e-9) r.path.push_back(p);
    length = polyline_length(r.path);
  }
  return r;
}

// Pure pursuit on a fixed path at constant speed.
std::vector<AgentState> follow(const AgentState& start, const std::vector<Vec2>& path, int steps,
                               const RolloutConfig& cfg) {
  std::vector<AgentState> traj{start};
  AgentState s = start;
  const double h = cfg.dt / cfg.substeps;
  double station = 0.0;
  for (int k = 0; k < steps; ++k) {
    for (int m = 0; m < cfg.substeps; ++m) {
      // Local projection keeps progress monotone where the path loops back.
      const double window = 2.0 * (s.speed * h + cfg.lookahead) + 1.0;
      const auto [before, after] = split_polyline(path, station);
      const auto ahead = split_polyline(after, window).first;
      if (ahead.size() >= 2) station += project_onto_polyline(ahead, s.position()).arc_length;
      const Vec2 target = point_at_arc_length(path, station + cfg.lookahead);
      const Vec2 fwd = unit_from_angle(s.heading);
      const Vec2 to = target - s.position();
      const double dist = norm(to);
      double curvature = 0.0;
      if (dist > 1e-9) {
        const double alpha = std::atan2(cross(fwd, to), dot(fwd, to));
        curvature = 2.0 * std::sin(alpha) / dist;
      }
      // Midpoint heading keeps the arc integration second-order.
      const double dtheta = s.speed * curvature * h;
      const Vec2 mid = unit_from_angle(s.heading + 0.5 * dtheta);
      s.x += mid.x * s.speed * h;
      s.y += mid.y * s.speed * h;
      s.heading = wrap_angle(s.heading + dtheta);
    }
    traj.push_back(s);
  }
  return traj;
}

std::vector<AgentState> constant_velocity(const AgentState& start, int steps, double dt) {
  std::vector<AgentState> traj{start};
  const Vec2 v = unit_from_angle(start.heading) * start.speed;
  for (int k = 1; k <= steps; ++k) {
    AgentState s = start;
    s.x += v.x * dt * k;
    s.y += v.y * dt * k;
    traj.push_back(s);
  }
  return traj;
}

}  // namespace

std::optional<LaneAssignment> assign_lane(Vec2 position, double heading, const LaneGraph& g, const AssignConfig& cfg) {
  std::optional<LaneAssignment> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    const auto& pts = g.edges[e].geometry.waypoints;
    if (pts.size() < 2) continue;
    const auto proj = project_onto_polyline(pts, position);
    if (proj.distance > cfg.max_lateral) continue;
    const std::size_t seg = std::min(proj.segment, pts.size() - 2);
    const Vec2 lane_dir = pts[seg + 1] - pts[seg];
    if (norm(lane_dir) < 1e-12) continue;
    const double err = std::abs(wrap_angle(heading - angle_of(lane_dir)));
    if (err > cfg.max_heading_error) continue;
    const double cost = proj.distance + cfg.heading_weight * err;
    if (cost < best_cost) {
      best_cost = cost;
      best = LaneAssignment{e, proj.arc_length, proj.distance, err};
    }
  }
  return best;
}

std::optional<LaneAssignment> assign_lane(const AgentState& agent, const LaneGraph& g, const AssignConfig& cfg) {
  return assign_lane(agent.position(), agent.heading, g, cfg);
}

std::optional<LaneAssignment> assign_lane(const AgentDetection& agent, const LaneGraph& g, const AssignConfig& cfg) {
  return assign_lane(agent.center, agent.heading, g, cfg);
}

std::vector<JointFuture> rollout(const Scenario& scene, const LaneGraph& g, const RolloutConfig& cfg) {
  if (cfg.K < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(cfg.horizon >= cfg.dt)) throw Error(ErrorCode::HorizonTooShort, "horizon shorter than one timestep");
  if (cfg.substeps < 1) throw Error(ErrorCode::InvalidArgument, "substeps must be at least 1");
  const int steps = static_cast<int>(std::floor(cfg.horizon / cfg.dt + 1e-9));

  if (scene.agents.empty()) {
    std::vector<JointFuture> out(static_cast<std::size_t>(cfg.K));
    for (auto& f : out) {
      f.probability = 1.0 / cfg.K;
      f.dt = cfg.dt;
    }
    return out;
  }

  std::vector<std::optional<LaneAssignment>> assigned;
  for (const auto& a : scene.agents) assigned.push_back(assign_lane(a.initial_state, g, cfg.assign));

  std::vector<std::vector<std::vector<int>>> keys;
  std::vector<JointFuture> out;
  for (int k = 0; k < cfg.K; ++k) {
    std::vector<std::vector<int>> key;
    std::vector<Route> routes;
    for (std::size_t i = 0; i < scene.agents.size(); ++i) {
      if (!assigned[i]) {
        key.emplace_back();
        routes.emplace_back();
        continue;
      }
      const double needed = scene.agents[i].initial_state.speed * cfg.horizon + cfg.lookahead + 5.0;
      routes.push_back(plan_route(g, *assigned[i], k, needed));
      key.push_back(routes.back().edges);
    }
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    keys.push_back(key);
    JointFuture f;
    f.dt = cfg.dt;
    for (std::size_t i = 0; i < scene.agents.size(); ++i) {
      const auto& start = scene.agents[i].initial_state;
      f.trajectories.push_back(assigned[i] ? follow(start, routes[i].path, steps, cfg)
                                           : constant_velocity(start, steps, cfg.dt));
      f.routes.push_back(std::move(routes[i].edges));
      f.paths.push_back(std::move(routes[i].path));
    }
    out.push_back(std::move(f));
  }
  for (auto& f : out) f.probability = 1.0 / static_cast<double>(out.size());
  return out;
}

Scenario apply_future(const Scenario& scene, const JointFuture& future) {
  Scenario s = scene;
  s.dt = future.dt;
  for (std::size_t i = 0; i < s.agents.size() && i < future.trajectories.size(); ++i)
    s.agents[i].trajectory = future.trajectories[i];
  return s;
}

}  // namespace dsg
