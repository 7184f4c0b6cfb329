#include "dsg/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace dsg {

Vec2 CubicBezier::eval(double t) const {
  const double u = 1.0 - t;
  return p[0] * (u * u * u) + p[1] * (3 * u * u * t) + p[2] * (3 * u * t * t) + p[3] * (t * t * t);
}

Vec2 CubicBezier::d1(double t) const {
  const double u = 1.0 - t;
  return (p[1] - p[0]) * (3 * u * u) + (p[2] - p[1]) * (6 * u * t) + (p[3] - p[2]) * (3 * t * t);
}

Vec2 CubicBezier::d2(double t) const {
  return (p[2] - p[1] * 2.0 + p[0]) * (6 * (1.0 - t)) + (p[3] - p[2] * 2.0 + p[1]) * (6 * t);
}

double CubicBezier::curvature(double t) const {
  const Vec2 a = d1(t);
  const double s = norm(a);
  if (s < 1e-12) return std::numeric_limits<double>::infinity();
  return cross(a, d2(t)) / (s * s * s);
}

double CubicBezier::max_curvature(int samples) const {
  double best = 0.0;
  for (int k = 0; k <= samples; ++k) best = std::max(best, std::abs(curvature(static_cast<double>(k) / samples)));
  return best;
}

std::vector<Vec2> CubicBezier::sample(int n) const {
  std::vector<Vec2> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(eval(static_cast<double>(k) / (n - 1)));
  return out;
}

std::vector<Vec2> CubicBezier::flatten(double step) const {
  const double approx_len = distance(p[0], p[1]) + distance(p[1], p[2]) + distance(p[2], p[3]);
  const int n = std::max(2, static_cast<int>(std::ceil(4.0 * approx_len / step)) + 1);
  return resample_polyline(sample(n), step);
}

namespace {

std::vector<double> chord_parameters(std::span<const Vec2> pts) {
  std::vector<double> t(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) t[k] = t[k - 1] + distance(pts[k - 1], pts[k]);
  const double total = t.back();
  for (auto& v : t) v = total > 0 ? v / total : 0.0;
  return t;
}

// One Newton step pulling t towards the closest curve point.
double reparameterize(const CubicBezier& c, Vec2 q, double t) {
  const Vec2 d = c.eval(t) - q;
  const Vec2 a = c.d1(t);
  const Vec2 b = c.d2(t);
  const double den = dot(a, a) + dot(d, b);
  if (std::abs(den) < 1e-12) return t;
  return std::clamp(t - dot(d, a) / den, 0.0, 1.0);
}

}  // namespace

CubicBezier fit_tangent_cubic(std::span<const Vec2> points, Vec2 t0, Vec2 t3, int refinements) {
  const Vec2 p0 = points.front();
  const Vec2 p3 = points.back();
  const double chord = distance(p0, p3);
  // Circular-arc handle length for the turn between the end tangents.
  const double quarter = std::cos(angle_between(t0, t3) / 4.0);
  const double fallback = std::max(chord, 1e-9) / (3.0 * quarter * quarter);
  // Short handles put a cusp at the ends; long ones loop.
  const double min_handle = 0.15 * chord;
  const double max_handle = 1.0 * std::max(chord, polyline_length(points) * 0.5);

  auto solve = [&](const std::vector<double>& ts) {
    double c00 = 0, c01 = 0, c11 = 0, x0 = 0, x1 = 0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double t = ts[k];
      const double u = 1.0 - t;
      const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
      const Vec2 a1 = t0 * b1;
      const Vec2 a2 = -t3 * b2;
      const Vec2 r = points[k] - p0 * (b0 + b1) - p3 * (b2 + b3);
      c00 += dot(a1, a1);
      c01 += dot(a1, a2);
      c11 += dot(a2, a2);
      x0 += dot(a1, r);
      x1 += dot(a2, r);
    }
    const double det = c00 * c11 - c01 * c01;
    double a = fallback;
    double b = fallback;
    if (std::abs(det) > 1e-12 * std::max(1.0, c00 * c11)) {
      a = (x0 * c11 - x1 * c01) / det;
      b = (c00 * x1 - c01 * x0) / det;
    }
    if (!std::isfinite(a) || !std::isfinite(b) || (a <= 0.0 && b <= 0.0)) a = b = fallback;
    a = std::clamp(a, min_handle, max_handle);
    b = std::clamp(b, min_handle, max_handle);
    return CubicBezier{{p0, p0 + t0 * a, p3 - t3 * b, p3}};
  };

  auto ts = chord_parameters(points);
  CubicBezier best = solve(ts);
  for (int r = 0; r < refinements; ++r) {
    for (std::size_t k = 1; k + 1 < points.size(); ++k) ts[k] = reparameterize(best, points[k], ts[k]);
    best = solve(ts);
  }
  return best;
}

double stroke_iou(std::span<const Vec2> a, std::span<const Vec2> b, double cell_size, int stroke_px) {
  if (a.empty() || b.empty()) return 0.0;
  const double radius = stroke_px / 2.0;
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (auto pts : {a, b}) {
    for (const auto& q : pts) {
      lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
      hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
    }
  }
  const double margin = (radius + 2.0) * cell_size;
  lo = lo - Vec2{margin, margin};
  const int w = static_cast<int>(std::ceil((hi.x - lo.x + margin) / cell_size)) + 1;
  const int h = static_cast<int>(std::ceil((hi.y - lo.y + margin) / cell_size)) + 1;
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(w) * h, 0);

  auto paint = [&](std::span<const Vec2> pts, std::uint8_t bit) {
    auto cell = [&](Vec2 q) { return (q - lo) / cell_size; };
    auto stamp = [&](Vec2 pa, Vec2 pb) {
      const int i0 = std::max(0, static_cast<int>(std::floor(std::min(pa.x, pb.x) - radius)));
      const int i1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(pa.x, pb.x) + radius)));
      const int j0 = std::max(0, static_cast<int>(std::floor(std::min(pa.y, pb.y) - radius)));
      const int j1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(pa.y, pb.y) + radius)));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
          if (segment_distance({double(i), double(j)}, pa, pb) <= radius) grid[static_cast<std::size_t>(j) * w + i] |= bit;
    };
    if (pts.size() == 1) stamp(cell(pts[0]), cell(pts[0]));
    for (std::size_t k = 1; k < pts.size(); ++k) stamp(cell(pts[k - 1]), cell(pts[k]));
  };
  paint(a, 1);
  paint(b, 2);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (auto g : grid) {
    inter += g == 3 ? 1 : 0;
    uni += g != 0 ? 1 : 0;
  }
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace dsg
