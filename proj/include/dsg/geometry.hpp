#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace dsg {

/// Planar point or vector in meters (world frame) unless stated otherwise.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }
inline double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

/// Unsigned angle between two non-zero vectors, radians in [0, pi].
inline double angle_between(Vec2 a, Vec2 b) {
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

/// Closest point on segment [a, b] to p; `t` receives the segment parameter.
inline Vec2 closest_on_segment(Vec2 p, Vec2 a, Vec2 b, double* t = nullptr) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  if (t) *t = s;
  return a + ab * s;
}

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  return distance(p, closest_on_segment(p, a, b));
}

/// Total arc length of a polyline.
inline double polyline_length(std::span<const Vec2> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

/// Resamples a polyline at a fixed arc-length interval. Both endpoints are kept;
/// the last interval may be shorter than `spacing`.
std::vector<Vec2> resample_polyline(std::span<const Vec2> pts, double spacing);

struct PolylineProjection {
  double distance = 0.0;    ///< lateral distance to the polyline
  double arc_length = 0.0;  ///< station of the closest point
  std::size_t segment = 0;  ///< index of the segment holding the closest point
  Vec2 point;
};

/// Projects p onto a polyline with at least two points.
PolylineProjection project_onto_polyline(std::span<const Vec2> pts, Vec2 p);

/// Point at a given station along a polyline (clamped to its ends).
Vec2 point_at_arc_length(std::span<const Vec2> pts, double s);

/// Cuts a polyline at station s; both halves contain the cut point.
std::pair<std::vector<Vec2>, std::vector<Vec2>> split_polyline(std::span<const Vec2> pts, double s);

}  // namespace dsg
