#include <doctest.h>

#include <algorithm>
#include <set>

#include "dsg/error.hpp"
#include "dsg/lane_vectorizer.hpp"
#include "support.hpp"

using namespace dsg;
using namespace testing;

namespace {

constexpr double kMpp = 0.3125;

Scenario one_way_cross() {
  return scene_with({Centerline{line({-35, 0.1}, {35, 0.1}, 1)}, Centerline{line({0.1, -35}, {0.1, 35}, 1)}});
}

Scenario two_way_cross() {
  return scene_with({Centerline{{{-35, -1.75}, {35, -1.75}}}, Centerline{{{35, 1.75}, {-35, 1.75}}},
                     Centerline{{{1.75, -35}, {1.75, 35}}}, Centerline{{{-1.75, 35}, {-1.75, -35}}}});
}

Scenario t_junction() {
  return scene_with({Centerline{{{-35, 0.1}, {0.1, 0.1}}}, Centerline{{{0.1, 0.1}, {35, 0.1}}},
                     Centerline{{{0.1, 0.1}, {0.1, 35}}}});
}

FeatureMap flipped(const FeatureMap& fm) {
  FeatureMap out = fm;
  for (int j = 0; j < fm.height(); ++j) {
    for (int i = 0; i < fm.width(); ++i) {
      out.at(0, {i, j}) = 1.0f - fm.at(0, {i, j});
      out.at(1, {i, j}) = 1.0f - fm.at(1, {i, j});
    }
  }
  return out;
}

int count_label(const LabeledPixelGraph& l, VertexLabel lab, bool terminals_only) {
  int n = 0;
  for (std::size_t v = 0; v < l.labels.size(); ++v) {
    if (terminals_only && l.graph.vertices[v].degree != 1) continue;
    n += l.labels[v] == lab ? 1 : 0;
  }
  return n;
}

LabeledPixelGraph labeled_for(const FeatureMap& fm) { return label_terminals(extract_edges_vertices(skeletonize(fm)), fm); }

}  // namespace

TEST_CASE("horizontal lane labels its left terminal entry and right terminal exit") {
  const FeatureMap fm = rasterize(scene_with({Centerline{{{-30, 0.1}, {30, 0.1}}}}));
  const auto l = labeled_for(fm);
  REQUIRE(l.graph.vertices.size() == 2);
  const int left = l.graph.vertices[0].position.x < l.graph.vertices[1].position.x ? 0 : 1;
  CHECK(l.labels[left] == VertexLabel::Entry);
  CHECK(l.labels[1 - left] == VertexLabel::Exit);

  const auto r = labeled_for(flipped(fm));
  CHECK(r.labels[left] == VertexLabel::Exit);
  CHECK(r.labels[1 - left] == VertexLabel::Entry);
}

TEST_CASE("a two-way four-way intersection has 4 entry and 4 exit terminals") {
  const auto l = labeled_for(rasterize(two_way_cross()));
  CHECK(count_label(l, VertexLabel::Entry, true) == 4);
  CHECK(count_label(l, VertexLabel::Exit, true) == 4);
  // Oracle: an entry terminal is where its lane starts, so its position lies
  // near one of the source lanes' first waypoints.
  const FeatureMap fm = rasterize(two_way_cross());
  for (std::size_t v = 0; v < l.labels.size(); ++v) {
    if (l.graph.vertices[v].degree != 1) continue;
    const Vec2 w = fm.pixel_to_world(l.graph.vertices[v].position);
    double to_start = 1e9, to_end = 1e9;
    for (const auto& c : two_way_cross().lanes) {
      to_start = std::min(to_start, distance(w, c.waypoints.front()));
      to_end = std::min(to_end, distance(w, c.waypoints.back()));
    }
    CHECK((l.labels[v] == VertexLabel::Entry) == (to_start < to_end));
  }
}

TEST_CASE("a straight lane yields one directed edge and an empty residual") {
  const FeatureMap fm = rasterize(scene_with({Centerline{{{-30, 0.1}, {30, 0.1}}}}));
  const auto ex = extract_approach_edges(labeled_for(fm), fm);
  CHECK(ex.graph.edges.size() == 1);
  CHECK(ex.residual.graph.edges.empty());
  CHECK(ex.residual.ports.empty());
}

TEST_CASE("a T junction yields three approach edges around one residual cluster") {
  const FeatureMap fm = rasterize(t_junction());
  const auto ex = extract_approach_edges(labeled_for(fm), fm);
  CHECK(ex.graph.edges.size() == 3);
  REQUIRE(ex.residual.ports.size() == 3);
  int inbound = 0;
  for (const auto& p : ex.residual.ports) {
    CHECK(p.anchor == ex.residual.ports.front().anchor);
    inbound += p.inbound ? 1 : 0;
  }
  CHECK(inbound == 1);
  const auto& anchor = ex.residual.graph.vertices[ex.residual.ports.front().anchor];
  CHECK(anchor.pixels.size() >= 1);
  CHECK(ex.residual.graph.edges.empty());
}

TEST_CASE("empty graphs give empty outputs") {
  const FeatureMap fm = FeatureMap::background(32, 32, kMpp);
  const auto l = label_terminals(PixelGraph{}, fm);
  CHECK(l.labels.empty());
  const auto ex = extract_approach_edges(l, fm);
  CHECK(ex.graph.vertices.empty());
  CHECK(ex.graph.edges.empty());
  LaneGraph g;
  CHECK(fit_intersection_curves(ex.residual, g, fm).empty());
}

TEST_CASE("a blank map is EmptyMap") {
  try {
    vectorize(FeatureMap::background(64, 64, kMpp));
    FAIL("expected EmptyMap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMap);
  }
}

TEST_CASE("straight path fits a straight segment") {
  const auto path = line({-5, 1}, {5, 1}, 40);
  const BezierFit fit = fit_path(path, {1, 0}, {1, 0}, kMpp, kDefaultStroke);
  CHECK(fit.iou >= 0.95);
  CHECK(fit.max_curvature <= 1e-6);
  CHECK(fit.accepted(VectorizeConfig{}));
  for (const auto& p : fit.control_points()) CHECK(p.y == doctest::Approx(1.0));
}

TEST_CASE("quarter turn of radius 8 m is accepted near the analytic curvature 1/r") {
  const auto path = arc({0, 0}, 8.0, -kPi / 2, 0.0, 60);
  const BezierFit fit = fit_path(path, {1, 0}, {0, 1}, kMpp, kDefaultStroke);
  CHECK(fit.iou >= 0.5);
  CHECK(fit.max_curvature <= 0.2);
  CHECK(fit.max_curvature == doctest::Approx(1.0 / 8.0).epsilon(0.15));
  CHECK(fit.accepted(VectorizeConfig{}));
}

TEST_CASE("U turn of radius 2 m is rejected on curvature") {
  const auto path = arc({0, 0}, 2.0, -kPi / 2, kPi / 2, 60);
  const BezierFit fit = fit_path(path, {1, 0}, {-1, 0}, kMpp, kDefaultStroke);
  CHECK(fit.max_curvature > 0.2);
  CHECK_FALSE(fit.accepted(VectorizeConfig{}));
}

TEST_CASE("a rasterized straight lane round-trips within one pixel at the ends") {
  const Centerline src{{{-30, -12.3}, {30, 17.9}}};
  const auto res = vectorize(rasterize(scene_with({src})));
  REQUIRE(res.lanes.size() == 1);
  const auto& w = res.lanes[0].waypoints;
  CHECK(distance(w.front(), src.waypoints.front()) <= kMpp + 1e-9);
  CHECK(distance(w.back(), src.waypoints.back()) <= kMpp + 1e-9);
}

TEST_CASE("one-way X intersection: 4 approaches and every entry/exit pair is a candidate") {
  const FeatureMap fm = rasterize(one_way_cross());
  const auto l = labeled_for(fm);
  auto ex = extract_approach_edges(l, fm);
  CHECK(ex.graph.edges.size() == 4);
  REQUIRE(ex.residual.ports.size() == 4);
  // Brute-force enumeration of (entry, exit) port pairs.
  std::set<std::pair<int, int>> expected;
  for (const auto& a : ex.residual.ports)
    for (const auto& b : ex.residual.ports)
      if (a.inbound && !b.inbound) expected.insert({a.vertex, b.vertex});
  const auto cands = fit_intersection_curves(ex.residual, ex.graph, fm);
  std::set<std::pair<int, int>> got;
  for (const auto& c : cands) got.insert({c.entry, c.exit});
  CHECK(got == expected);
  CHECK(cands.size() <= 16);

  // Both through movements survive the gates.
  int straight = 0;
  for (const auto& c : cands) {
    const Vec2 d = c.path.back() - c.path.front();
    const Vec2 t = ex.graph.vertices[c.entry].direction;
    if (angle_between(d, t) < deg(10)) {
      ++straight;
      CHECK(c.accepted);
    }
  }
  CHECK(straight == 2);
  CHECK(ex.graph.edges.size() == 4 + static_cast<std::size_t>(std::count_if(
                                         cands.begin(), cands.end(), [](const auto& c) { return c.accepted; })));
}

TEST_CASE("vectorized edges are traversable and anchored at their vertices") {
  for (const auto& s : {one_way_cross(), two_way_cross(), t_junction()}) {
    const auto res = vectorize(rasterize(s));
    for (const auto& e : res.graph.edges) {
      const auto& w = e.geometry.waypoints;
      REQUIRE(w.size() >= 2);
      for (std::size_t k = 1; k < w.size(); ++k) CHECK(distance(w[k], w[k - 1]) <= 1.0);
      CHECK(distance(w.front(), res.graph.vertices[e.from].position) <= kMpp);
      CHECK(distance(w.back(), res.graph.vertices[e.to].position) <= kMpp);
    }
    for (std::size_t v = 0; v < res.graph.vertices.size(); ++v) {
      if (res.graph.vertices[v].label == VertexLabel::Entry) CHECK(!res.graph.out_edges(static_cast<int>(v)).empty());
    }
  }
}

TEST_CASE("acceptance is monotone in k_thresh") {
  const FeatureMap fm = rasterize(two_way_cross());
  std::set<std::pair<int, int>> previous;
  std::vector<double> ious;
  for (double k : {0.05, 0.1, 0.2, 0.4, 1.0}) {
    VectorizeConfig cfg;
    cfg.k_thresh = k;
    const auto res = vectorize(fm, cfg);
    std::set<std::pair<int, int>> accepted;
    std::vector<double> now;
    for (const auto& c : res.candidates) {
      now.push_back(c.fit.iou);
      if (c.accepted) accepted.insert({c.entry, c.exit});
    }
    CHECK(std::includes(accepted.begin(), accepted.end(), previous.begin(), previous.end()));
    if (!ious.empty()) CHECK(now == ious);
    ious = now;
    previous = accepted;
  }
}

TEST_CASE("negating the direction channels swaps labels and reverses edges") {
  for (const auto& s : {one_way_cross(), two_way_cross(), t_junction()}) {
    const FeatureMap fm = rasterize(s);
    const auto a = labeled_for(fm);
    const auto b = labeled_for(flipped(fm));
    REQUIRE(a.labels.size() == b.labels.size());
    for (std::size_t v = 0; v < a.labels.size(); ++v) {
      if (a.labels[v] == VertexLabel::Entry) CHECK(b.labels[v] == VertexLabel::Exit);
      if (a.labels[v] == VertexLabel::Exit) CHECK(b.labels[v] == VertexLabel::Entry);
    }
    const auto ga = extract_approach_edges(a, fm).graph;
    const auto gb = extract_approach_edges(b, flipped(fm)).graph;
    std::multiset<std::pair<int, int>> fwd, rev;
    for (const auto& e : ga.edges) fwd.insert({e.from, e.to});
    for (const auto& e : gb.edges) rev.insert({e.to, e.from});
    CHECK(fwd == rev);

    // Full pipeline: every accepted movement reappears reversed.
    const auto va = vectorize(fm);
    const auto vb = vectorize(flipped(fm));
    CHECK(va.graph.edges.size() == vb.graph.edges.size());
  }
}
