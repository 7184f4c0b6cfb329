#include "dsg/skeletonizer.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>

namespace dsg {
namespace {

// Clockwise from north: P2..P9 in Zhang–Suen notation.
constexpr std::array<Pixel, 8> kRing = {{{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

Pixel offset(Pixel p, Pixel d) { return {p.i + d.i, p.j + d.j}; }

std::array<bool, 8> ring_of(const SkeletonMask& m, Pixel p) {
  std::array<bool, 8> r{};
  for (int k = 0; k < 8; ++k) r[k] = m.at(offset(p, kRing[k]));
  return r;
}

int transitions(const std::array<bool, 8>& r) {
  int a = 0;
  for (int k = 0; k < 8; ++k) a += (!r[k] && r[(k + 1) % 8]) ? 1 : 0;
  return a;
}

bool zhang_suen_pass(SkeletonMask& m, int sub) {
  std::vector<Pixel> doomed;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      const Pixel p{i, j};
      if (!m.at(p)) continue;
      const auto r = ring_of(m, p);
      const int b = static_cast<int>(std::count(r.begin(), r.end(), true));
      if (b < 2 || b > 6 || transitions(r) != 1) continue;
      // r[0]=N, r[2]=E, r[4]=S, r[6]=W
      if (sub == 0) {
        if (r[0] && r[2] && r[4]) continue;
        if (r[2] && r[4] && r[6]) continue;
      } else {
        if (r[0] && r[2] && r[6]) continue;
        if (r[0] && r[4] && r[6]) continue;
      }
      doomed.push_back(p);
    }
  }
  for (const auto& p : doomed) m.set(p, false);
  return !doomed.empty();
}

// Number of 8-connected groups formed by the set ring positions.
int ring_components(const std::array<bool, 8>& r) {
  std::array<int, 8> parent{};
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int a = 0; a < 8; ++a) {
    if (!r[a]) continue;
    for (int b = a + 1; b < 8; ++b) {
      if (!r[b]) continue;
      if (std::abs(kRing[a].i - kRing[b].i) <= 1 && std::abs(kRing[a].j - kRing[b].j) <= 1) parent[find(a)] = find(b);
    }
  }
  int n = 0;
  for (int a = 0; a < 8; ++a) n += (r[a] && find(a) == a) ? 1 : 0;
  return n;
}

// Removes corner pixels of 4-connected staircases whose neighbours stay
// connected without them.
bool remove_staircases(SkeletonMask& m) {
  bool changed = false;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      const Pixel p{i, j};
      if (!m.at(p)) continue;
      const auto r = ring_of(m, p);
      const int b = static_cast<int>(std::count(r.begin(), r.end(), true));
      if (b < 2) continue;
      const bool corner = (r[0] && r[2]) || (r[2] && r[4]) || (r[4] && r[6]) || (r[6] && r[0]);
      if (!corner || ring_components(r) != 1) continue;
      m.set(p, false);
      changed = true;
    }
  }
  return changed;
}

// Walks from a terminal along degree-2 pixels. Returns the walked pixels and
// whether the walk ended next to a junction.
std::pair<std::vector<Pixel>, bool> walk_spur(const SkeletonMask& m, Pixel start, int limit) {
  std::vector<Pixel> walked{start};
  Pixel prev{-1, -1};
  Pixel cur = start;
  while (static_cast<int>(walked.size()) <= limit) {
    Pixel next{-1, -1};
    int found = 0;
    for (const auto& d : kRing) {
      const Pixel q = offset(cur, d);
      if (q == prev || !m.at(q)) continue;
      next = q;
      ++found;
    }
    if (found == 0) return {walked, false};
    if (found > 1 || neighbour_count(m, next) >= 3) {
      // `cur` touches a junction (either directly or via a fork).
      return {walked, true};
    }
    prev = cur;
    cur = next;
    walked.push_back(cur);
    if (neighbour_count(m, cur) == 1) return {walked, false};
  }
  return {walked, false};
}

bool prune_spurs(SkeletonMask& m) {
  bool changed = false;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      const Pixel p{i, j};
      if (!m.at(p) || neighbour_count(m, p) != 1) continue;
      auto [walked, hit_junction] = walk_spur(m, p, kMinSpurLength);
      if (hit_junction && static_cast<int>(walked.size()) < kMinSpurLength) {
        for (const auto& q : walked) m.set(q, false);
        changed = true;
      }
    }
  }
  return changed;
}

// Erases 8-connected components smaller than kMinSpurLength pixels.
bool drop_specks(SkeletonMask& m) {
  std::vector<std::uint8_t> seen(m.bits.size(), 0);
  bool changed = false;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      const Pixel s{i, j};
      const std::size_t idx = static_cast<std::size_t>(j) * m.width + i;
      if (!m.at(s) || seen[idx]) continue;
      std::vector<Pixel> comp{s};
      seen[idx] = 1;
      for (std::size_t k = 0; k < comp.size(); ++k) {
        for (const auto& d : kRing) {
          const Pixel q = offset(comp[k], d);
          if (!m.at(q)) continue;
          const std::size_t qi = static_cast<std::size_t>(q.j) * m.width + q.i;
          if (seen[qi]) continue;
          seen[qi] = 1;
          comp.push_back(q);
        }
      }
      if (static_cast<int>(comp.size()) < kMinSpurLength) {
        for (const auto& q : comp) m.set(q, false);
        changed = true;
      }
    }
  }
  return changed;
}

// Thinning eats up to two pixels off each ribbon end; walk terminals back out
// along their own direction while the input foreground allows.
void regrow_ends(SkeletonMask& m, const SkeletonMask& input, int max_steps) {
  std::vector<Pixel> terminals;
  for (int j = 0; j < m.height; ++j)
    for (int i = 0; i < m.width; ++i)
      if (m.at({i, j}) && neighbour_count(m, {i, j}) == 1) terminals.push_back({i, j});
  for (Pixel cur : terminals) {
    Pixel prev = cur;
    for (const auto& d : kRing)
      if (m.at(offset(cur, d))) prev = offset(cur, d);
    const Pixel step{cur.i - prev.i, cur.j - prev.j};
    for (int k = 0; k < max_steps; ++k) {
      const Pixel next{cur.i + step.i, cur.j + step.j};
      if (!input.at(next) || m.at(next)) break;
      bool clear = true;
      for (const auto& d : kRing) {
        const Pixel q = offset(next, d);
        if (!(q == cur) && m.at(q)) clear = false;
      }
      if (!clear) break;
      m.set(next, true);
      cur = next;
    }
  }
}

}  // namespace

std::size_t SkeletonMask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

int neighbour_count(const SkeletonMask& m, Pixel p) {
  int n = 0;
  for (const auto& d : kRing) n += m.at(offset(p, d)) ? 1 : 0;
  return n;
}

std::vector<int> PixelGraph::incident(int v) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    if (edges[e].from == v || edges[e].to == v) out.push_back(e);
  return out;
}

SkeletonMask skeletonize_mask(const SkeletonMask& input) {
  SkeletonMask m = input;
  for (auto& b : m.bits) b = b ? 1 : 0;
  for (;;) {
    bool changed = false;
    while (zhang_suen_pass(m, 0) | zhang_suen_pass(m, 1)) changed = true;
    changed |= remove_staircases(m);
    changed |= prune_spurs(m);
    changed |= drop_specks(m);
    if (!changed) break;
  }
  regrow_ends(m, input, 2);
  return m;
}

SkeletonMask skeletonize(const FeatureMap& fm) {
  SkeletonMask m{fm.width(), fm.height(), lane_mask(fm)};
  return skeletonize_mask(m);
}

PixelGraph extract_edges_vertices(const SkeletonMask& sk) {
  PixelGraph g;
  g.width = sk.width;
  g.height = sk.height;
  const auto idx = [&](Pixel p) { return static_cast<std::size_t>(p.j) * sk.width + p.i; };

  // Vertex pixels: terminals (1 neighbour), junctions (>= 3), isolated dots.
  std::vector<int> owner(sk.bits.size(), -1);
  for (int j = 0; j < sk.height; ++j) {
    for (int i = 0; i < sk.width; ++i) {
      const Pixel p{i, j};
      if (!sk.at(p) || owner[idx(p)] >= 0) continue;
      const int n = neighbour_count(sk, p);
      if (n == 2) continue;
      PixelVertex v;
      v.pixels.push_back(p);
      owner[idx(p)] = static_cast<int>(g.vertices.size());
      if (n >= 3) {
        for (std::size_t k = 0; k < v.pixels.size(); ++k) {
          for (const auto& d : kRing) {
            const Pixel q = offset(v.pixels[k], d);
            if (!sk.at(q) || owner[idx(q)] >= 0 || neighbour_count(sk, q) < 3) continue;
            owner[idx(q)] = owner[idx(p)];
            v.pixels.push_back(q);
          }
        }
      }
      Vec2 c;
      for (const auto& q : v.pixels) {
        c += Vec2{double(q.i), double(q.j)};
        v.on_border |= q.i == 0 || q.j == 0 || q.i == sk.width - 1 || q.j == sk.height - 1;
      }
      v.position = c / static_cast<double>(v.pixels.size());
      g.vertices.push_back(std::move(v));
    }
  }

  std::vector<std::uint8_t> used(sk.bits.size(), 0);
  auto trace = [&](int from, Pixel anchor, Pixel first) {
    PixelEdge e;
    e.from = from;
    e.path = {anchor};
    Pixel prev = anchor;
    Pixel cur = first;
    for (;;) {
      e.path.push_back(cur);
      if (owner[idx(cur)] >= 0) {
        e.to = owner[idx(cur)];
        break;
      }
      used[idx(cur)] = 1;
      Pixel next{-1, -1};
      for (const auto& d : kRing) {
        const Pixel q = offset(cur, d);
        if (!sk.at(q) || q == prev) continue;
        if (owner[idx(q)] >= 0 && owner[idx(q)] == from && e.path.size() == 2) continue;
        if (owner[idx(q)] < 0 && used[idx(q)]) continue;
        next = q;
        if (owner[idx(q)] >= 0) break;
      }
      if (next.i < 0) {
        e.to = from;  // closed loop back onto an already-used pixel
        break;
      }
      prev = cur;
      cur = next;
    }
    return e;
  };

  for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
    for (const auto& p : g.vertices[v].pixels) {
      for (const auto& d : kRing) {
        const Pixel q = offset(p, d);
        if (!sk.at(q)) continue;
        const int o = owner[idx(q)];
        if (o >= 0) {
          // Directly adjacent vertices of different clusters: empty interior.
          if (o > v) {
            const bool dup = std::any_of(g.edges.begin(), g.edges.end(), [&](const PixelEdge& e) {
              return e.from == v && e.to == o && e.path.size() == 2;
            });
            if (!dup) g.edges.push_back(PixelEdge{v, o, {p, q}});
          }
          continue;
        }
        if (used[idx(q)]) continue;
        g.edges.push_back(trace(v, p, q));
      }
    }
  }

  // Vertex-free loops: seed a vertex on the first unused pixel.
  for (int j = 0; j < sk.height; ++j) {
    for (int i = 0; i < sk.width; ++i) {
      const Pixel p{i, j};
      if (!sk.at(p) || owner[idx(p)] >= 0 || used[idx(p)]) continue;
      const int v = static_cast<int>(g.vertices.size());
      PixelVertex pv;
      pv.pixels = {p};
      pv.position = {double(p.i), double(p.j)};
      pv.on_border = p.i == 0 || p.j == 0 || p.i == sk.width - 1 || p.j == sk.height - 1;
      g.vertices.push_back(pv);
      owner[idx(p)] = v;
      for (const auto& d : kRing) {
        const Pixel q = offset(p, d);
        if (sk.at(q) && !used[idx(q)] && owner[idx(q)] < 0) {
          g.edges.push_back(trace(v, p, q));
          break;
        }
      }
    }
  }

  for (const auto& e : g.edges) {
    ++g.vertices[e.from].degree;
    ++g.vertices[e.to].degree;
  }
  return g;
}

void render_skeleton_png(const SkeletonMask& sk, const PixelGraph& pg, const std::filesystem::path& path) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(sk.width) * sk.height * 3, 0);
  auto paint = [&](Pixel p, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t k = (static_cast<std::size_t>(p.j) * sk.width + p.i) * 3;
    rgb[k] = r;
    rgb[k + 1] = g;
    rgb[k + 2] = b;
  };
  for (int j = 0; j < sk.height; ++j)
    for (int i = 0; i < sk.width; ++i)
      if (sk.at({i, j})) paint({i, j}, 255, 255, 255);
  for (const auto& v : pg.vertices) {
    for (const auto& p : v.pixels) {
      if (v.degree == 1) paint(p, 0, 255, 0);
      else if (v.degree >= 3) paint(p, 255, 0, 0);
    }
  }
  write_rgb_png(path, sk.width, sk.height, rgb);
}

}  // namespace dsg
