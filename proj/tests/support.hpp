#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "dsg/scenario_model.hpp"

namespace testing {

using dsg::Vec2;

constexpr double kPi = std::numbers::pi;

inline double deg(double d) { return d * kPi / 180.0; }

/// Points on a circle of radius r around c, from angle a0 to a1 in `n` steps.
inline std::vector<Vec2> arc(Vec2 c, double r, double a0, double a1, int n) {
  std::vector<Vec2> pts;
  for (int k = 0; k <= n; ++k) {
    const double a = a0 + (a1 - a0) * k / n;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return pts;
}

inline std::vector<Vec2> line(Vec2 a, Vec2 b, int n) {
  std::vector<Vec2> pts;
  for (int k = 0; k <= n; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / n));
  return pts;
}

inline dsg::Scenario scene_with(std::vector<dsg::Centerline> lanes, double range = 80.0) {
  dsg::Scenario s;
  s.range = range;
  s.lanes = std::move(lanes);
  return s;
}

inline dsg::Agent agent_at(double x, double y, double heading, double speed, double length = 5.0,
                           double width = 2.0) {
  dsg::Agent a;
  a.length = length;
  a.width = width;
  a.initial_state = {x, y, heading, speed};
  return a;
}

}  // namespace testing
