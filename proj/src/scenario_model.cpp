#include "dsg/scenario_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsg/error.hpp"

namespace dsg {
namespace {

constexpr double kInRangeSlack = 1e-9;

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

bool in_square(Vec2 p, double half) {
  const double lim = half * (1.0 + kInRangeSlack) + kInRangeSlack;
  return std::abs(p.x) <= lim && std::abs(p.y) <= lim;
}

// Liang-Barsky clip of segment a->b against |x|,|y| <= half.
bool clip_segment(Vec2 a, Vec2 b, double half, double& t0, double& t1) {
  t0 = 0.0;
  t1 = 1.0;
  const Vec2 d = b - a;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x + half, half - a.x, a.y + half, half - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double r = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

Vec2 clamp_to_square(Vec2 p, double half) {
  return {std::clamp(p.x, -half, half), std::clamp(p.y, -half, half)};
}

void push_distinct(std::vector<Waypoint>& pts, Vec2 p) {
  if (pts.empty() || distance(pts.back(), p) > 1e-9) pts.push_back(p);
}

void flush_piece(std::vector<Waypoint>& piece, std::vector<Centerline>& out) {
  if (piece.size() >= 2) out.push_back(Centerline{std::move(piece)});
  piece.clear();
}

struct Box {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  void add(Vec2 p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  Vec2 center() const { return (lo + hi) * 0.5; }
};

Box lane_box(const Scenario& s) {
  Box box;
  for (const auto& lane : s.lanes)
    for (const auto& p : lane.waypoints) box.add(p);
  return box;
}

void translate(Scenario& s, Vec2 offset) {
  for (auto& lane : s.lanes)
    for (auto& p : lane.waypoints) p = p - offset;
  for (auto& agent : s.agents) {
    agent.initial_state.x -= offset.x;
    agent.initial_state.y -= offset.y;
    if (agent.trajectory) {
      for (auto& st : *agent.trajectory) {
        st.x -= offset.x;
        st.y -= offset.y;
      }
    }
  }
}

void drop_agents_outside(Scenario& s) {
  const double half = s.range / 2.0;
  std::erase_if(s.agents, [half](const Agent& a) {
    return !in_square(a.initial_state.position(), half);
  });
}

// Translation below this is treated as zero so that re-normalizing a
// normalized scene is an exact identity.
bool negligible(Vec2 offset, double range) {
  return std::abs(offset.x) <= 1e-9 * range && std::abs(offset.y) <= 1e-9 * range;
}

}  // namespace

void validate_scenario(const Scenario& s, bool require_in_range) {
  if (!(s.range > 0.0) || !std::isfinite(s.range))
    throw Error(ErrorCode::InvalidArgument, "range must be positive");
  if (!(s.v_max > 0.0) || !std::isfinite(s.v_max))
    throw Error(ErrorCode::InvalidArgument, "v_max must be positive");
  if (!(s.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double half = s.range / 2.0;
  for (std::size_t i = 0; i < s.lanes.size(); ++i) {
    const auto& pts = s.lanes[i].waypoints;
    if (pts.size() < 2)
      throw Error(ErrorCode::DegeneratePolyline, "lane " + std::to_string(i) + " has fewer than 2 waypoints");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!finite(pts[k]))
        throw Error(ErrorCode::InvalidArgument, "lane " + std::to_string(i) + " has a non-finite waypoint");
      if (k > 0 && pts[k] == pts[k - 1])
        throw Error(ErrorCode::DegeneratePolyline, "lane " + std::to_string(i) + " repeats waypoint " + std::to_string(k));
      if (require_in_range && !in_square(pts[k], half))
        throw Error(ErrorCode::OutOfRange, "lane " + std::to_string(i) + " leaves the range square");
    }
  }
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i];
    const auto& st = a.initial_state;
    const std::string tag = "agent " + std::to_string(i);
    if (!(a.length > 0.0) || !(a.width > 0.0) || a.length < a.width)
      throw Error(ErrorCode::InvalidArgument, tag + " needs length >= width > 0");
    if (!std::isfinite(st.x) || !std::isfinite(st.y) || !std::isfinite(st.heading))
      throw Error(ErrorCode::InvalidArgument, tag + " has a non-finite state");
    if (st.speed < 0.0 || st.speed > s.v_max)
      throw Error(ErrorCode::InvalidArgument, tag + " speed outside [0, v_max]");
    if (a.trajectory && (a.trajectory->empty() || a.trajectory->front() != st))
      throw Error(ErrorCode::InvalidArgument, tag + " trajectory does not start at the initial state");
    if (require_in_range && !in_square(st.position(), half))
      throw Error(ErrorCode::OutOfRange, tag + " lies outside the range square");
  }
}

std::vector<Centerline> clip_to_square(const Centerline& c, double half) {
  std::vector<Centerline> out;
  std::vector<Waypoint> piece;
  const auto& pts = c.waypoints;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double t0 = 0.0;
    double t1 = 1.0;
    if (!clip_segment(pts[i - 1], pts[i], half, t0, t1)) {
      flush_piece(piece, out);
      continue;
    }
    const Vec2 d = pts[i] - pts[i - 1];
    const Vec2 a = t0 > 0.0 ? clamp_to_square(pts[i - 1] + d * t0, half) : pts[i - 1];
    const Vec2 b = t1 < 1.0 ? clamp_to_square(pts[i - 1] + d * t1, half) : pts[i];
    if (t0 > 0.0) flush_piece(piece, out);
    push_distinct(piece, a);
    push_distinct(piece, b);
    if (t1 < 1.0) flush_piece(piece, out);
  }
  flush_piece(piece, out);
  return out;
}

Scenario normalize_scenario(const Scenario& s) {
  if (s.lanes.empty()) throw Error(ErrorCode::EmptyScenario, "scenario has no lanes");
  Scenario out = s;
  const double half = s.range / 2.0;

  Vec2 offset = lane_box(out).center();
  if (!negligible(offset, s.range)) translate(out, offset);

  std::vector<Centerline> clipped;
  for (const auto& lane : out.lanes) {
    auto pieces = clip_to_square(lane, half);
    clipped.insert(clipped.end(), pieces.begin(), pieces.end());
  }
  if (clipped.empty()) throw Error(ErrorCode::EmptyScenario, "no lane survives clipping");
  out.lanes = std::move(clipped);
  drop_agents_outside(out);

  // Clipping can shift the lane box off-center; a second translation keeps
  // the result centered and still inside the square.
  offset = lane_box(out).center();
  if (!negligible(offset, s.range)) {
    translate(out, offset);
    drop_agents_outside(out);
  }
  return out;
}

std::vector<Vec2> polyline_directions(const Centerline& c) {
  const auto& pts = c.waypoints;
  if (pts.size() < 2) throw Error(ErrorCode::DegeneratePolyline, "centerline needs at least 2 waypoints");
  std::vector<Vec2> dirs;
  dirs.reserve(pts.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 d = pts[i + 1] - pts[i];
    const double n = norm(d);
    if (n == 0.0) throw Error(ErrorCode::DegeneratePolyline, "consecutive waypoints coincide at index " + std::to_string(i));
    dirs.push_back(d / n);
  }
  dirs.push_back(dirs.back());
  return dirs;
}

}  // namespace dsg
