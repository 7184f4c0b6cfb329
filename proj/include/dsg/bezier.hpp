#pragma once

#include <array>
#include <span>
#include <vector>

#include "dsg/geometry.hpp"

namespace dsg {

struct CubicBezier {
  std::array<Vec2, 4> p;

  Vec2 eval(double t) const;
  Vec2 d1(double t) const;
  Vec2 d2(double t) const;
  /// Signed curvature at t; infinite where the first derivative vanishes.
  double curvature(double t) const;
  /// Maximum |curvature| over `samples` uniformly spaced parameters.
  double max_curvature(int samples = 256) const;
  /// `n` >= 2 points at uniform parameter spacing, endpoints included.
  std::vector<Vec2> sample(int n) const;
  /// Points spaced roughly `step` apart along the curve.
  std::vector<Vec2> flatten(double step) const;
};

/// Least-squares cubic through fixed endpoints with inner control points
/// constrained to the end tangents: P1 = P0 + a·t0, P2 = P3 − b·t3. The
/// handle lengths a, b are solved on a chord-length parameterization and
/// kept positive. `points` must hold at least two points; t0 and t3 are unit
/// vectors in the direction of travel.
CubicBezier fit_tangent_cubic(std::span<const Vec2> points, Vec2 t0, Vec2 t3, int refinements = 2);

/// Intersection over union of two polylines, each drawn as a stroke of
/// `stroke_px` pixels on a grid with the given cell size.
double stroke_iou(std::span<const Vec2> a, std::span<const Vec2> b, double cell_size, int stroke_px);

}  // namespace dsg
