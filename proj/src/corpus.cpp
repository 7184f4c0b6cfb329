#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dsg/bezier.hpp"
#include "dsg/error.hpp"
#include "dsg/scenario_io.hpp"
#include "json.hpp"

namespace dsg {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpacing = 0.5;
constexpr Template kAllTemplates[] = {Template::Straight, Template::Curved, Template::TJunction, Template::XJunction,
                                      Template::Merge};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

 private:
  std::mt19937_64 gen_;
};

Vec2 right_of(Vec2 u) { return {u.y, -u.x}; }
Vec2 left_of(Vec2 u) { return {-u.y, u.x}; }

Centerline straight(Vec2 a, Vec2 b) { return Centerline{resample_polyline(std::vector<Vec2>{a, b}, kSpacing)}; }

// Cubic connector between a lane end (heading d0) and a lane start (heading
// d3), with handles matching a circular arc of the same turn angle.
Centerline connector(Vec2 p0, Vec2 d0, Vec2 p3, Vec2 d3) {
  const double chord = distance(p0, p3);
  const double turn = angle_between(d0, d3);
  const double c = std::cos(turn / 4.0);
  const double h = chord / (3.0 * c * c);
  const CubicBezier b{{p0, p0 + d0 * h, p3 - d3 * h, p3}};
  auto pts = b.flatten(kSpacing);
  pts.front() = p0;
  pts.back() = p3;
  return Centerline{std::move(pts)};
}

struct Arm {
  Vec2 out;         ///< outward unit direction from the junction center
  Centerline in;    ///< towards the junction, ends at the stop line
  Centerline exit;  ///< away from the junction, starts at the stop line
};

Arm make_arm(Vec2 center, double angle, double stop, double far, double lane_width) {
  const Vec2 u = unit_from_angle(angle);
  const double off = lane_width / 2.0;
  Arm arm;
  arm.out = u;
  arm.exit = straight(center + u * stop + right_of(u) * off, center + u * far + right_of(u) * off);
  arm.in = straight(center + u * far + left_of(u) * off, center + u * stop + left_of(u) * off);
  return arm;
}

std::vector<Centerline> junction(Vec2 center, const std::vector<double>& angles, double stop, double far,
                                 double lane_width) {
  std::vector<Arm> arms;
  for (double a : angles) arms.push_back(make_arm(center, a, stop, far, lane_width));
  std::vector<Centerline> lanes;
  for (const auto& arm : arms) {
    lanes.push_back(arm.in);
    lanes.push_back(arm.exit);
  }
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (std::size_t b = 0; b < arms.size(); ++b) {
      if (a == b) continue;
      lanes.push_back(connector(arms[a].in.waypoints.back(), -arms[a].out, arms[b].exit.waypoints.front(), arms[b].out));
    }
  }
  return lanes;
}

std::vector<Centerline> arc_road(Vec2 center, double radius, double a0, double a1, double lane_width) {
  std::vector<Centerline> lanes;
  for (double side : {-1.0, 1.0}) {
    const double r = radius + side * lane_width / 2.0;
    const int n = std::max(2, static_cast<int>(std::ceil(r * std::abs(a1 - a0) / kSpacing)) + 1);
    Centerline c;
    for (int k = 0; k < n; ++k) {
      const double a = a0 + (a1 - a0) * k / (n - 1);
      c.waypoints.push_back(center + unit_from_angle(a) * r);
    }
    // Counter-clockwise travel keeps the inner lane on the left.
    if (side < 0) std::reverse(c.waypoints.begin(), c.waypoints.end());
    lanes.push_back(std::move(c));
  }
  return lanes;
}

std::vector<Centerline> build_lanes(Template t, const CorpusConfig& cfg, Rng& rng) {
  const double R = cfg.range;
  const double far = 1.5 * R;
  const double w = cfg.lane_width;
  const double theta = rng.uniform(-kPi, kPi);
  switch (t) {
    case Template::Straight: {
      const Vec2 u = unit_from_angle(theta);
      const Vec2 c = left_of(u) * rng.uniform(-0.1 * R, 0.1 * R);
      return {straight(c - u * far + right_of(u) * (w / 2), c + u * far + right_of(u) * (w / 2)),
              straight(c + u * far + left_of(u) * (w / 2), c - u * far + left_of(u) * (w / 2))};
    }
    case Template::Curved: {
      const double radius = rng.uniform(0.6 * R, 2.0 * R);
      const Vec2 mid = unit_from_angle(theta) * rng.uniform(-0.1 * R, 0.1 * R);
      const Vec2 center = mid - unit_from_angle(theta) * radius;
      const double span = std::min(kPi * 0.9, 1.6 * R / radius);
      return arc_road(center, radius, theta - span, theta + span, w);
    }
    case Template::TJunction: {
      const double stop = rng.uniform(9.0, 12.0);
      const Vec2 c{rng.uniform(-0.1 * R, 0.1 * R), rng.uniform(-0.1 * R, 0.1 * R)};
      const double side = theta + kPi / 2 + rng.uniform(-15.0, 15.0) * kPi / 180.0;
      return junction(c, {theta, side, theta + kPi}, stop, far, w);
    }
    case Template::XJunction: {
      const double stop = rng.uniform(9.0, 12.0);
      const Vec2 c{rng.uniform(-0.1 * R, 0.1 * R), rng.uniform(-0.1 * R, 0.1 * R)};
      std::vector<double> angles;
      for (int k = 0; k < 4; ++k) angles.push_back(theta + k * kPi / 2 + rng.uniform(-10.0, 10.0) * kPi / 180.0);
      return junction(c, angles, stop, far, w);
    }
    case Template::Merge: {
      // Two-way road; an on-ramp joins the right lane at a shallow angle.
      const Vec2 u = unit_from_angle(theta);
      const Vec2 c = left_of(u) * rng.uniform(-0.05 * R, 0.05 * R);
      const Vec2 m = c + right_of(u) * (w / 2) + u * rng.uniform(-0.1 * R, 0.1 * R);
      const double phi = rng.uniform(15.0, 30.0) * kPi / 180.0;
      const Vec2 ramp_dir = u * std::cos(phi) + left_of(u) * std::sin(phi);
      return {straight(c - u * far + right_of(u) * (w / 2), m), straight(m, c + u * far + right_of(u) * (w / 2)),
              straight(c + u * far + left_of(u) * (w / 2), c - u * far + left_of(u) * (w / 2)),
              straight(m - ramp_dir * far, m)};
    }
  }
  return {};
}

void place_agents(Scenario& s, const CorpusConfig& cfg, Rng& rng) {
  const int wanted = rng.integer(0, std::max(0, cfg.max_agents));
  double total = 0.0;
  std::vector<double> lengths;
  for (const auto& lane : s.lanes) {
    lengths.push_back(polyline_length(lane.waypoints));
    total += lengths.back();
  }
  const double margin = s.range / 2.0 - 4.0;
  for (int attempt = 0; attempt < 50 * wanted && static_cast<int>(s.agents.size()) < wanted; ++attempt) {
    double pick = rng.uniform(0.0, total);
    std::size_t li = 0;
    while (li + 1 < lengths.size() && pick > lengths[li]) pick -= lengths[li++];
    const auto& pts = s.lanes[li].waypoints;
    if (lengths[li] < 8.0) continue;
    const double station = rng.uniform(3.0, lengths[li] - 3.0);
    const Vec2 p = point_at_arc_length(pts, station);
    const Vec2 ahead = point_at_arc_length(pts, station + 0.5);
    const Vec2 behind = point_at_arc_length(pts, station - 0.5);
    const double speed = rng.uniform(0.0, 0.6 * s.v_max);
    const double length = rng.uniform(4.0, 5.5);
    const double width = rng.uniform(1.8, 2.2);
    if (std::abs(p.x) > margin || std::abs(p.y) > margin) continue;
    const bool crowded = std::any_of(s.agents.begin(), s.agents.end(), [&](const Agent& a) {
      return distance(a.initial_state.position(), p) < 9.0;
    });
    if (crowded) continue;
    Agent a;
    a.length = length;
    a.width = width;
    a.initial_state = {p.x, p.y, wrap_angle(angle_of(ahead - behind)), speed};
    s.agents.push_back(a);
  }
}

}  // namespace

const char* to_string(Template t) {
  switch (t) {
    case Template::Straight: return "straight";
    case Template::Curved: return "curved";
    case Template::TJunction: return "t-junction";
    case Template::XJunction: return "x-junction";
    case Template::Merge: return "merge";
  }
  return "straight";
}

Template template_from_string(const std::string& name) {
  for (auto t : kAllTemplates)
    if (name == to_string(t)) return t;
  throw Error(ErrorCode::InvalidArgument, "unknown template '" + name + "'");
}

CorpusConfig CorpusConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("corpus config: ") + e.what());
  }
  CorpusConfig cfg;
  cfg.range = j.value("range", cfg.range);
  cfg.v_max = j.value("v_max", cfg.v_max);
  cfg.max_agents = j.value("max_agents", cfg.max_agents);
  cfg.lane_width = j.value("lane_width", cfg.lane_width);
  if (!j.contains("templates") || !j["templates"].is_object())
    throw Error(ErrorCode::ParseError, "corpus config needs a 'templates' object");
  // Fixed template order regardless of key order in the file.
  for (auto t : kAllTemplates) {
    const auto it = j["templates"].find(to_string(t));
    if (it != j["templates"].end()) cfg.counts.emplace_back(t, it->get<int>());
  }
  for (const auto& [k, v] : j["templates"].items()) template_from_string(k);
  return cfg;
}

CorpusConfig CorpusConfig::mixed(int total, double range) {
  CorpusConfig cfg;
  cfg.range = range;
  const int n = static_cast<int>(std::size(kAllTemplates));
  for (int k = 0; k < n; ++k) cfg.counts.emplace_back(kAllTemplates[k], total / n + (k < total % n ? 1 : 0));
  return cfg;
}

Scenario generate_scenario(Template t, const CorpusConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Scenario raw;
  raw.range = cfg.range;
  raw.v_max = cfg.v_max;
  raw.lanes = build_lanes(t, cfg, rng);
  // Crop around the origin so that normalization centers the designed scene.
  std::vector<Centerline> cropped;
  for (const auto& lane : raw.lanes) {
    auto pieces = clip_to_square(lane, cfg.range / 2.0);
    cropped.insert(cropped.end(), pieces.begin(), pieces.end());
  }
  raw.lanes = std::move(cropped);
  Scenario s = normalize_scenario(raw);
  place_agents(s, cfg, rng);
  s.metadata["generator"] = "synthetic";
  s.metadata["template"] = to_string(t);
  s.metadata["seed"] = std::to_string(seed);
  validate_scenario(s, true);
  return s;
}

std::vector<Scenario> generate_synthetic_corpus(const CorpusConfig& cfg, std::uint64_t seed) {
  std::vector<Scenario> out;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 master(seq);
  for (const auto& [t, count] : cfg.counts)
    for (int k = 0; k < count; ++k) out.push_back(generate_scenario(t, cfg, master()));
  return out;
}

}  // namespace dsg
