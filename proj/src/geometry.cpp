#include "dsg/geometry.hpp"

#include <limits>

#include "dsg/error.hpp"

namespace dsg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyScenario: return "EmptyScenario";
    case ErrorCode::DegeneratePolyline: return "DegeneratePolyline";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::MissingDirection: return "MissingDirection";
    case ErrorCode::EmptyMap: return "EmptyMap";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
  }
  return "Unknown";
}

std::vector<Vec2> resample_polyline(std::span<const Vec2> pts, double spacing) {
  std::vector<Vec2> out;
  if (pts.empty()) return out;
  out.push_back(pts.front());
  if (pts.size() == 1) return out;
  double next = spacing;
  double walked = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1];
    const Vec2 b = pts[i];
    const double seg = distance(a, b);
    while (seg > 0 && next <= walked + seg) {
      out.push_back(a + (b - a) * ((next - walked) / seg));
      next += spacing;
    }
    walked += seg;
  }
  // Avoid a near-duplicate final point produced by rounding.
  if (distance(out.back(), pts.back()) > 1e-9 * std::max(1.0, spacing)) {
    out.push_back(pts.back());
  } else {
    out.back() = pts.back();
  }
  return out;
}

PolylineProjection project_onto_polyline(std::span<const Vec2> pts, Vec2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double station = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double t = 0.0;
    const Vec2 q = closest_on_segment(p, pts[i - 1], pts[i], &t);
    const double d = distance(p, q);
    const double seg = distance(pts[i - 1], pts[i]);
    if (d < best.distance) {
      best.distance = d;
      best.arc_length = station + t * seg;
      best.segment = i - 1;
      best.point = q;
    }
    station += seg;
  }
  return best;
}

Vec2 point_at_arc_length(std::span<const Vec2> pts, double s) {
  if (pts.empty()) return {};
  if (s <= 0.0) return pts.front();
  double walked = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double seg = distance(pts[i - 1], pts[i]);
    if (walked + seg >= s && seg > 0) {
      return pts[i - 1] + (pts[i] - pts[i - 1]) * ((s - walked) / seg);
    }
    walked += seg;
  }
  return pts.back();
}

std::pair<std::vector<Vec2>, std::vector<Vec2>> split_polyline(std::span<const Vec2> pts, double s) {
  std::vector<Vec2> head;
  std::vector<Vec2> tail;
  if (pts.empty()) return {head, tail};
  const Vec2 cut = point_at_arc_length(pts, s);
  double walked = 0.0;
  head.push_back(pts.front());
  std::size_t i = 1;
  for (; i < pts.size(); ++i) {
    const double seg = distance(pts[i - 1], pts[i]);
    if (walked + seg >= s) break;
    walked += seg;
    head.push_back(pts[i]);
  }
  if (distance(head.back(), cut) > 1e-12 || head.size() == 1) head.push_back(cut);
  tail.push_back(cut);
  for (; i < pts.size(); ++i)
    if (distance(tail.back(), pts[i]) > 1e-12) tail.push_back(pts[i]);
  if (tail.size() == 1) tail.push_back(cut);
  return {head, tail};
}

}  // namespace dsg
