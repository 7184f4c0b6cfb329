#include <doctest.h>

#include <queue>
#include <set>

#include "dsg/raster_codec.hpp"
#include "dsg/skeletonizer.hpp"
#include "support.hpp"

using namespace dsg;
using namespace testing;

namespace {

SkeletonMask blank(int w, int h) { return SkeletonMask{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)}; }

void fill_rect(SkeletonMask& m, int i0, int j0, int i1, int j1) {
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) m.set({i, j}, true);
}

int components(const SkeletonMask& m) {
  std::vector<int> seen(m.bits.size(), 0);
  int count = 0;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * m.width + i;
      if (!m.bits[id] || seen[id]) continue;
      ++count;
      std::queue<Pixel> q;
      q.push({i, j});
      seen[id] = 1;
      while (!q.empty()) {
        const Pixel p = q.front();
        q.pop();
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const Pixel n{p.i + di, p.j + dj};
            if (!m.at(n)) continue;
            const std::size_t nid = static_cast<std::size_t>(n.j) * m.width + n.i;
            if (seen[nid]) continue;
            seen[nid] = 1;
            q.push(n);
          }
        }
      }
    }
  }
  return count;
}

int count_with_degree(const PixelGraph& g, int degree) {
  int n = 0;
  for (const auto& v : g.vertices) n += v.degree == degree ? 1 : 0;
  return n;
}

// Structural audit shared by the shape tests.
void audit(const SkeletonMask& sk, const PixelGraph& g) {
  // Crossing-number oracle: vertex pixels are exactly the pixels whose
  // neighbour count differs from 2.
  std::set<std::pair<int, int>> vertex_pixels;
  for (const auto& v : g.vertices)
    for (const auto& p : v.pixels) vertex_pixels.insert({p.i, p.j});
  for (int j = 0; j < sk.height; ++j) {
    for (int i = 0; i < sk.width; ++i) {
      if (!sk.at({i, j})) continue;
      const int n = neighbour_count(sk, {i, j});
      if (n != 2) CHECK(vertex_pixels.count({i, j}) == 1);
    }
  }
  // Degrees equal incident edge ends.
  std::vector<int> ends(g.vertices.size(), 0);
  for (const auto& e : g.edges) {
    ++ends[e.from];
    ++ends[e.to];
  }
  for (std::size_t v = 0; v < g.vertices.size(); ++v) CHECK(g.vertices[v].degree == ends[v]);
  // Edge chains are 8-connected and vertex-free inside; pixels partition.
  std::set<std::pair<int, int>> covered = vertex_pixels;
  std::size_t interior = 0;
  for (const auto& e : g.edges) {
    for (std::size_t k = 1; k < e.path.size(); ++k) {
      CHECK(std::abs(e.path[k].i - e.path[k - 1].i) <= 1);
      CHECK(std::abs(e.path[k].j - e.path[k - 1].j) <= 1);
    }
    for (std::size_t k = 1; k + 1 < e.path.size(); ++k) {
      CHECK(vertex_pixels.count({e.path[k].i, e.path[k].j}) == 0);
      covered.insert({e.path[k].i, e.path[k].j});
    }
    interior += e.interior_size();
  }
  CHECK(interior + vertex_pixels.size() == sk.count());
  CHECK(covered.size() == sk.count());
}

}  // namespace

TEST_CASE("a 3-pixel bar thins to a 1-pixel line of the same extent") {
  SkeletonMask m = blank(40, 20);
  fill_rect(m, 5, 9, 34, 11);
  const SkeletonMask sk = skeletonize_mask(m);
  int lo = 100, hi = -1;
  for (int j = 0; j < sk.height; ++j) {
    for (int i = 0; i < sk.width; ++i) {
      if (!sk.at({i, j})) continue;
      CHECK(j == 10);
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  CHECK(lo <= 6);
  CHECK(hi >= 33);
  const PixelGraph g = extract_edges_vertices(sk);
  CHECK(g.vertices.size() == 2);
  CHECK(g.edges.size() == 1);
  audit(sk, g);
}

TEST_CASE("empty input gives an empty skeleton and graph") {
  const SkeletonMask sk = skeletonize_mask(blank(16, 16));
  CHECK(sk.count() == 0);
  const PixelGraph g = extract_edges_vertices(sk);
  CHECK(g.vertices.empty());
  CHECK(g.edges.empty());
  CHECK(skeletonize(FeatureMap::background(16, 16, 1.0)).count() == 0);
}

TEST_CASE("a 1-pixel line has two terminals and one edge") {
  SkeletonMask m = blank(30, 30);
  for (int k = 3; k < 27; ++k) m.set({k, k}, true);
  const SkeletonMask sk = skeletonize_mask(m);
  CHECK(sk == m);
  const PixelGraph g = extract_edges_vertices(sk);
  CHECK(g.vertices.size() == 2);
  CHECK(count_with_degree(g, 1) == 2);
  CHECK(g.edges.size() == 1);
  audit(sk, g);
}

TEST_CASE("plus sign of two 3-pixel bars has one degree-4 junction") {
  SkeletonMask m = blank(41, 41);
  fill_rect(m, 4, 19, 36, 21);
  fill_rect(m, 19, 4, 21, 36);
  const SkeletonMask sk = skeletonize_mask(m);
  CHECK(components(sk) == 1);
  const PixelGraph g = extract_edges_vertices(sk);
  CHECK(g.vertices.size() == 5);
  CHECK(count_with_degree(g, 4) == 1);
  CHECK(count_with_degree(g, 1) == 4);
  CHECK(g.edges.size() == 4);
  audit(sk, g);
}

TEST_CASE("T junction gives three terminals, one junction and three edges") {
  SkeletonMask m = blank(41, 41);
  for (int i = 4; i <= 36; ++i) m.set({i, 10}, true);
  for (int j = 11; j <= 36; ++j) m.set({20, j}, true);
  const PixelGraph g = extract_edges_vertices(skeletonize_mask(m));
  CHECK(g.vertices.size() == 4);
  CHECK(count_with_degree(g, 1) == 3);
  CHECK(count_with_degree(g, 3) == 1);
  CHECK(g.edges.size() == 3);
  audit(skeletonize_mask(m), g);
}

TEST_CASE("X junction of two crossing lines gives five vertices and four edges") {
  SkeletonMask m = blank(41, 41);
  for (int k = 4; k <= 36; ++k) {
    m.set({k, k}, true);
    m.set({k, 40 - k}, true);
  }
  const SkeletonMask sk = skeletonize_mask(m);
  const PixelGraph g = extract_edges_vertices(sk);
  CHECK(g.vertices.size() == 5);
  CHECK(count_with_degree(g, 4) == 1);
  CHECK(g.edges.size() == 4);
  audit(sk, g);
}

TEST_CASE("short spurs are pruned") {
  SkeletonMask m = blank(40, 20);
  for (int i = 3; i <= 36; ++i) m.set({i, 10}, true);
  for (int j = 7; j <= 9; ++j) m.set({20, j}, true);  // 3-pixel spur
  const PixelGraph g = extract_edges_vertices(skeletonize_mask(m));
  CHECK(g.vertices.size() == 2);
  CHECK(g.edges.size() == 1);
}

TEST_CASE("skeletonization properties on rasterized scenes") {
  const std::vector<Scenario> scenes = {
      scene_with({Centerline{arc({-40, -40}, 55, 0.05, 1.5, 80)}}),
      scene_with({Centerline{{{-35, -1.75}, {35, -1.75}}}, Centerline{{{35, 1.75}, {-35, 1.75}}},
                  Centerline{{{-1.75, 35}, {-1.75, -35}}}, Centerline{{{1.75, -35}, {1.75, 35}}}}),
      scene_with({Centerline{{{-35, 0}, {0, 0}}}, Centerline{{{0, 0}, {35, 0}}}, Centerline{{{0, 0}, {0, 35}}}}),
  };
  for (const auto& s : scenes) {
    const FeatureMap fm = rasterize(s);
    const auto mask = lane_mask(fm);
    SkeletonMask input{fm.width(), fm.height(), mask};
    const SkeletonMask sk = skeletonize(fm);
    // Subset of the foreground, same connectivity, idempotent.
    for (std::size_t k = 0; k < sk.bits.size(); ++k)
      if (sk.bits[k]) CHECK(mask[k] == 1);
    CHECK(components(sk) == components(input));
    CHECK(skeletonize_mask(sk) == sk);
    audit(sk, extract_edges_vertices(sk));
  }
}
