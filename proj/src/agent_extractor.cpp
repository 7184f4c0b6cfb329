#include "dsg/agent_extractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsg {
namespace {

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

struct Component {
  std::vector<Pixel> pixels;
};

std::vector<Component> components(const FeatureMap& fm, double presence) {
  const int W = fm.width();
  const int H = fm.height();
  std::vector<int> seen(static_cast<std::size_t>(W) * H, 0);
  std::vector<Component> out;
  for (int j = 0; j < H; ++j) {
    for (int i = 0; i < W; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * W + i;
      if (seen[id] || !(fm.at(2, {i, j}) > presence)) continue;
      Component c;
      std::vector<Pixel> stack{{i, j}};
      seen[id] = 1;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const Pixel q{p.i + di, p.j + dj};
            if (!fm.contains(q)) continue;
            const std::size_t qi = static_cast<std::size_t>(q.j) * W + q.i;
            if (seen[qi] || !(fm.at(2, q) > presence)) continue;
            seen[qi] = 1;
            stack.push_back(q);
          }
        }
      }
      std::sort(c.pixels.begin(), c.pixels.end(), [](Pixel a, Pixel b) { return a.j != b.j ? a.j < b.j : a.i < b.i; });
      out.push_back(std::move(c));
    }
  }
  return out;
}

// Two clusters by Lloyd iterations, seeded at the extremes along `axis`.
std::pair<std::vector<Pixel>, std::vector<Pixel>> two_means(const FeatureMap& fm, const std::vector<Pixel>& pixels,
                                                            Vec2 axis) {
  std::vector<Vec2> pts;
  for (const auto& p : pixels) pts.push_back(fm.pixel_center(p));
  auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [axis](Vec2 a, Vec2 b) { return dot(a, axis) < dot(b, axis); });
  Vec2 c0 = *lo;
  Vec2 c1 = *hi;
  std::vector<int> label(pts.size(), 0);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    Vec2 s0, s1;
    int n0 = 0, n1 = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const int l = distance(pts[k], c0) <= distance(pts[k], c1) ? 0 : 1;
      changed |= l != label[k];
      label[k] = l;
      if (l == 0) {
        s0 += pts[k];
        ++n0;
      } else {
        s1 += pts[k];
        ++n1;
      }
    }
    if (n0 == 0 || n1 == 0) break;
    c0 = s0 / n0;
    c1 = s1 / n1;
    if (!changed && iter > 0) break;
  }
  std::pair<std::vector<Pixel>, std::vector<Pixel>> out;
  for (std::size_t k = 0; k < pts.size(); ++k) (label[k] == 0 ? out.first : out.second).push_back(pixels[k]);
  return out;
}

// Summed lane flow along `axis` over the box and a margin around it.
double flow_along(const FeatureMap& fm, const OrientedRect& r, Vec2 axis, int margin_px) {
  const double mpp = fm.meters_per_pixel();
  const double hl = r.length / 2.0 + margin_px * mpp;
  const double hw = r.width / 2.0 + margin_px * mpp;
  const Vec2 side = perp(r.axis);
  const Vec2 c = fm.world_to_pixel(r.center);
  const int reach = static_cast<int>(std::ceil(std::hypot(hl, hw) / mpp)) + 1;
  double sum = 0.0;
  for (int j = static_cast<int>(c.y) - reach; j <= static_cast<int>(c.y) + reach; ++j) {
    for (int i = static_cast<int>(c.x) - reach; i <= static_cast<int>(c.x) + reach; ++i) {
      const Pixel p{i, j};
      if (!fm.contains(p)) continue;
      const Vec2 d = fm.pixel_center(p) - r.center;
      if (std::abs(dot(d, r.axis)) > hl || std::abs(dot(d, side)) > hw) continue;
      if (auto dir = decode_direction(fm, p)) sum += dot(*dir, axis);
    }
  }
  return sum;
}

void detect(const FeatureMap& fm, const AgentExtractConfig& cfg, const std::vector<Pixel>& pixels, int depth,
            std::vector<AgentDetection>& out) {
  if (static_cast<int>(pixels.size()) < cfg.min_area) return;
  const double mpp = fm.meters_per_pixel();
  std::vector<Vec2> pts;
  Vec2 centroid;
  double channel = 0.0;
  for (const auto& p : pixels) {
    pts.push_back(fm.pixel_center(p));
    centroid += pts.back();
    channel += fm.at(2, p);
  }
  const double n = static_cast<double>(pixels.size());
  centroid = centroid / n;

  OrientedRect r = min_area_rect(pts);
  r.length += mpp;
  r.width += mpp;
  const double fill = n * mpp * mpp / r.area();
  if (fill < cfg.min_fill && depth < 3) {
    auto [a, b] = two_means(fm, pixels, r.axis);
    if (static_cast<int>(a.size()) >= cfg.min_area && static_cast<int>(b.size()) >= cfg.min_area) {
      detect(fm, cfg, a, depth + 1, out);
      detect(fm, cfg, b, depth + 1, out);
      return;
    }
  }

  AgentDetection d;
  d.center = centroid;
  d.length = r.length;
  d.width = r.width;
  d.pixel_count = static_cast<int>(pixels.size());
  d.speed = decode_speed(channel / n, cfg.v_max);
  r.center = centroid;
  const double flow = flow_along(fm, r, r.axis, cfg.lane_search);
  Vec2 forward = r.axis;
  if (flow < 0.0) forward = -forward;
  d.heading_ambiguous = std::abs(flow) < 1e-6;
  d.heading = wrap_angle(angle_of(forward));
  out.push_back(d);
}

}  // namespace

OrientedRect min_area_rect(std::span<const Vec2> points) {
  OrientedRect best;
  if (points.empty()) return best;
  const auto hull = convex_hull({points.begin(), points.end()});
  best.center = hull.front();
  best.axis = {1.0, 0.0};
  if (hull.size() == 1) return best;
  if (hull.size() == 2) {
    best.center = (hull[0] + hull[1]) / 2.0;
    best.axis = normalized(hull[1] - hull[0]);
    best.length = distance(hull[0], hull[1]);
    return best;
  }
  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < hull.size(); ++e) {
    const Vec2 u = normalized(hull[(e + 1) % hull.size()] - hull[e]);
    const Vec2 v = perp(u);
    double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
    for (const auto& p : hull) {
      u0 = std::min(u0, dot(p, u));
      u1 = std::max(u1, dot(p, u));
      v0 = std::min(v0, dot(p, v));
      v1 = std::max(v1, dot(p, v));
    }
    const double area = (u1 - u0) * (v1 - v0);
    if (area < best_area - 1e-12) {
      best_area = area;
      best.center = u * ((u0 + u1) / 2.0) + v * ((v0 + v1) / 2.0);
      if (u1 - u0 >= v1 - v0) {
        best.axis = u;
        best.length = u1 - u0;
        best.width = v1 - v0;
      } else {
        best.axis = v;
        best.length = v1 - v0;
        best.width = u1 - u0;
      }
    }
  }
  return best;
}

std::vector<AgentDetection> extract_agents(const FeatureMap& fm, const AgentExtractConfig& cfg) {
  std::vector<AgentDetection> out;
  for (const auto& c : components(fm, cfg.presence)) detect(fm, cfg, c.pixels, 0, out);
  return out;
}

std::vector<Agent> to_agents(std::span<const AgentDetection> detections) {
  std::vector<Agent> out;
  for (const auto& d : detections) {
    Agent a;
    a.length = d.length;
    a.width = d.width;
    a.initial_state = {d.center.x, d.center.y, d.heading, d.speed};
    out.push_back(a);
  }
  return out;
}

}  // namespace dsg
