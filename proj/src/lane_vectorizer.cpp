#include "dsg/lane_vectorizer.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>

#include "dsg/error.hpp"

namespace dsg {
namespace {

constexpr std::array<Pixel, 8> kRing = {{{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

Vec2 as_vec(Pixel p) { return {double(p.i), double(p.j)}; }

// World-frame direction expressed in pixel axes (rows grow southwards).
Vec2 to_pixel_frame(Vec2 d) { return {d.x, -d.y}; }

std::optional<Vec2> vertex_direction(const PixelVertex& v, const FeatureMap& fm) {
  // Pixel of the cluster closest to its centroid.
  Pixel best = v.pixels.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& p : v.pixels) {
    const double d = distance(as_vec(p), v.position);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  if (auto d = decode_direction(fm, best)) return d;
  Vec2 sum;
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      const Pixel q{best.i + di, best.j + dj};
      if (!fm.contains(q)) continue;
      if (auto d = decode_direction(fm, q)) sum += *d;
    }
  }
  if (norm(sum) < 1e-9) return std::nullopt;
  return normalized(sum);
}

std::vector<Pixel> oriented_path(const PixelEdge& e, int start_vertex) {
  std::vector<Pixel> path = e.path;
  if (e.from != start_vertex) std::reverse(path.begin(), path.end());
  return path;
}

// Sum over path steps of the agreement between decoded flow and step direction.
double flow_score(const std::vector<Pixel>& path, const FeatureMap& fm) {
  double score = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Vec2 step = normalized(as_vec(path[k + 1]) - as_vec(path[k]));
    if (auto d = decode_direction(fm, path[k])) score += dot(to_pixel_frame(*d), step);
    if (auto d = decode_direction(fm, path[k + 1])) score += dot(to_pixel_frame(*d), step);
  }
  return score;
}

// Pixel chain → world polyline from one vertex centroid to another, lightly
// smoothed to remove the staircase of the skeleton.
std::vector<Vec2> chain_to_world(const std::vector<Pixel>& path, Vec2 start_px, Vec2 end_px, const FeatureMap& fm) {
  std::vector<Vec2> px;
  px.reserve(path.size() + 2);
  px.push_back(start_px);
  for (std::size_t k = 1; k + 1 < path.size(); ++k) px.push_back(as_vec(path[k]));
  px.push_back(end_px);

  std::vector<Vec2> smooth = px;
  constexpr int kHalfWindow = 2;
  const int n = static_cast<int>(px.size());
  for (int k = 1; k + 1 < n; ++k) {
    const int h = std::min({kHalfWindow, k, n - 1 - k});
    Vec2 acc;
    for (int m = k - h; m <= k + h; ++m) acc += px[m];
    smooth[k] = acc / static_cast<double>(2 * h + 1);
  }
  std::vector<Vec2> world;
  world.reserve(smooth.size());
  for (const auto& p : smooth) {
    const Vec2 w = fm.pixel_to_world(p);
    if (world.empty() || distance(world.back(), w) > 1e-9) world.push_back(w);
  }
  if (world.size() == 1) world.push_back(fm.pixel_to_world(end_px));
  return world;
}

// Travel direction near the end of a world polyline, skipping the last few
// points where the skeleton bends into the junction cluster.
Vec2 end_tangent(const std::vector<Vec2>& pts, double meters_per_pixel) {
  const double skip = 2.0 * meters_per_pixel;
  const double reach = 14.0 * meters_per_pixel;
  const double total = polyline_length(pts);
  const Vec2 a = point_at_arc_length(pts, std::max(0.0, total - reach));
  const Vec2 b = point_at_arc_length(pts, std::max(0.0, total - skip));
  if (distance(a, b) > 1e-9) return normalized(b - a);
  return normalized(pts.back() - pts.front());
}

Vec2 start_tangent(const std::vector<Vec2>& pts, double meters_per_pixel) {
  std::vector<Vec2> rev(pts.rbegin(), pts.rend());
  return -end_tangent(rev, meters_per_pixel);
}

}  // namespace

const char* to_string(VertexLabel label) {
  switch (label) {
    case VertexLabel::Entry: return "entry";
    case VertexLabel::Exit: return "exit";
    case VertexLabel::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::vector<int> LaneGraph::out_edges(int v) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    if (edges[e].from == v) out.push_back(e);
  return out;
}

std::vector<int> LaneGraph::in_edges(int v) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    if (edges[e].to == v) out.push_back(e);
  return out;
}

std::vector<Centerline> LaneGraph::centerlines() const {
  std::vector<Centerline> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(e.geometry);
  return out;
}

LaneGraph lane_graph_from_centerlines(std::span<const Centerline> lanes, double merge_tolerance) {
  LaneGraph g;
  auto vertex_at = [&](Vec2 p, Vec2 dir) {
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v)
      if (distance(g.vertices[v].position, p) <= merge_tolerance) return v;
    g.vertices.push_back(LaneVertex{p, dir, VertexLabel::Unlabeled});
    return static_cast<int>(g.vertices.size()) - 1;
  };
  for (const auto& lane : lanes) {
    if (lane.waypoints.size() < 2) continue;
    const auto dirs = polyline_directions(lane);
    const int a = vertex_at(lane.waypoints.front(), dirs.front());
    const int b = vertex_at(lane.waypoints.back(), dirs.back());
    g.edges.push_back(DirectedEdge{a, b, lane});
  }
  return g;
}

LabeledPixelGraph label_terminals(const PixelGraph& pg, const FeatureMap& fm) {
  LabeledPixelGraph out;
  out.graph = pg;
  const std::size_t n = pg.vertices.size();
  out.labels.assign(n, VertexLabel::Unlabeled);
  out.directions.assign(n, std::nullopt);
  out.entry_role.assign(n, false);
  out.exit_role.assign(n, false);

  for (std::size_t v = 0; v < n; ++v) out.directions[v] = vertex_direction(pg.vertices[v], fm);

  std::vector<std::vector<int>> incident(n);
  for (int e = 0; e < static_cast<int>(pg.edges.size()); ++e) {
    incident[pg.edges[e].from].push_back(e);
    if (pg.edges[e].to != pg.edges[e].from) incident[pg.edges[e].to].push_back(e);
  }

  for (int t = 0; t < static_cast<int>(n); ++t) {
    if (pg.vertices[t].degree != 1 || incident[t].size() != 1) continue;
    const int e = incident[t].front();
    const auto& edge = pg.edges[e];
    const int b = edge.from == t ? edge.to : edge.from;
    if (b == t) continue;
    const bool through = pg.vertices[b].degree == 1;
    if (through && b < t) continue;  // handled from the other end
    if (!out.directions[t] || !out.directions[b])
      throw Error(ErrorCode::MissingDirection, "no lane direction decodable at vertex " + std::to_string(t));

    const bool inbound = flow_score(oriented_path(edge, t), fm) >= 0.0;
    out.approaches.push_back(ApproachEdge{e, t, b, inbound});
    out.labels[t] = inbound ? VertexLabel::Entry : VertexLabel::Exit;
    if (through) {
      out.labels[b] = inbound ? VertexLabel::Exit : VertexLabel::Entry;
    } else if (inbound) {
      out.entry_role[b] = true;
    } else {
      out.exit_role[b] = true;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (out.entry_role[v] && !out.exit_role[v]) out.labels[v] = VertexLabel::Entry;
    if (out.exit_role[v] && !out.entry_role[v]) out.labels[v] = VertexLabel::Exit;
  }
  return out;
}

ApproachExtraction extract_approach_edges(const LabeledPixelGraph& lpg, const FeatureMap& fm,
                                          const VectorizeConfig& cfg) {
  ApproachExtraction out;
  const auto& pg = lpg.graph;
  const std::size_t n = pg.vertices.size();
  const double mpp = fm.meters_per_pixel();

  out.graph.vertices.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    out.graph.vertices.push_back(LaneVertex{fm.pixel_to_world(pg.vertices[v].position),
                                            lpg.directions[v].value_or(Vec2{}), lpg.labels[v]});
  }

  auto& res = out.residual;
  res.graph.width = pg.width;
  res.graph.height = pg.height;
  res.graph.vertices = pg.vertices;
  res.removed.assign(n, false);
  res.entry_role = lpg.entry_role;
  res.exit_role = lpg.exit_role;

  std::vector<bool> approach_edge(pg.edges.size(), false);
  for (const auto& a : lpg.approaches) {
    approach_edge[a.edge] = true;
    res.removed[a.terminal] = true;
    const int up = a.inbound ? a.terminal : a.branch;
    const int down = a.inbound ? a.branch : a.terminal;
    const auto path = oriented_path(pg.edges[a.edge], up);
    auto world = chain_to_world(path, pg.vertices[up].position, pg.vertices[down].position, fm);
    if (pg.vertices[a.branch].degree == 1) {
      res.removed[a.branch] = true;
      out.graph.edges.push_back(DirectedEdge{up, down, Centerline{std::move(world)}});
      continue;
    }

    const double total = polyline_length(world);
    const double setback = std::min(cfg.port_setback, 0.5 * total);
    auto [head, tail] = split_polyline(world, a.inbound ? total - setback : setback);
    Port port;
    port.anchor = a.branch;
    port.inbound = a.inbound;
    port.vertex = static_cast<int>(out.graph.vertices.size());
    if (a.inbound) {
      port.tangent = end_tangent(head, mpp);
      port.tail = std::move(tail);
      out.graph.vertices.push_back(LaneVertex{head.back(), port.tangent, VertexLabel::Entry});
      out.graph.edges.push_back(DirectedEdge{a.terminal, port.vertex, Centerline{std::move(head)}});
    } else {
      port.tangent = start_tangent(tail, mpp);
      port.tail = std::move(head);
      out.graph.vertices.push_back(LaneVertex{tail.front(), port.tangent, VertexLabel::Exit});
      out.graph.edges.push_back(DirectedEdge{port.vertex, a.terminal, Centerline{std::move(tail)}});
    }
    res.ports.push_back(std::move(port));
  }

  for (std::size_t e = 0; e < pg.edges.size(); ++e)
    if (!approach_edge[e]) res.graph.edges.push_back(pg.edges[e]);
  for (auto& v : res.graph.vertices) v.degree = 0;
  for (const auto& e : res.graph.edges) {
    ++res.graph.vertices[e.from].degree;
    ++res.graph.vertices[e.to].degree;
  }
  return out;
}

BezierFit fit_path(std::span<const Vec2> path, Vec2 start_dir, Vec2 end_dir, double meters_per_pixel, int stroke) {
  BezierFit fit;
  fit.curve = fit_tangent_cubic(path, normalized(start_dir), normalized(end_dir));
  fit.max_curvature = fit.curve.max_curvature();
  const auto samples = fit.curve.flatten(0.25 * meters_per_pixel);
  fit.iou = stroke_iou(samples, path, meters_per_pixel, stroke);
  return fit;
}

std::vector<CurveCandidate> fit_intersection_curves(const ResidualGraph& residual, LaneGraph& g,
                                                    const FeatureMap& fm, const VectorizeConfig& cfg) {
  std::vector<CurveCandidate> candidates;
  const auto& pg = residual.graph;
  const std::size_t nv = pg.vertices.size();
  if (nv == 0) return candidates;

  // Connected components over residual edges decide path existence.
  std::vector<int> comp(nv, -1);
  {
    std::vector<std::vector<int>> adj(nv);
    for (const auto& e : pg.edges) {
      adj[e.from].push_back(e.to);
      adj[e.to].push_back(e.from);
    }
    int next = 0;
    for (std::size_t s = 0; s < nv; ++s) {
      if (comp[s] >= 0 || residual.removed[s]) continue;
      std::queue<int> q;
      q.push(static_cast<int>(s));
      comp[s] = next;
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int w : adj[u]) {
          if (comp[w] < 0) {
            comp[w] = next;
            q.push(w);
          }
        }
      }
      ++next;
    }
  }

  // Pixel domain of the residual.
  const int W = pg.width;
  const int H = pg.height;
  const auto idx = [W](Pixel p) { return static_cast<std::size_t>(p.j) * W + p.i; };
  std::vector<int> pixel_vertex(static_cast<std::size_t>(W) * H, -1);
  std::vector<std::uint8_t> domain(static_cast<std::size_t>(W) * H, 0);
  for (const auto& e : pg.edges)
    for (const auto& p : e.path) domain[idx(p)] = 1;
  for (std::size_t v = 0; v < nv; ++v) {
    if (residual.removed[v]) continue;
    for (const auto& p : pg.vertices[v].pixels) {
      domain[idx(p)] = 1;
      pixel_vertex[idx(p)] = static_cast<int>(v);
    }
  }

  std::vector<const Port*> exits;
  for (const auto& p : residual.ports)
    if (!p.inbound) exits.push_back(&p);

  std::vector<double> dist(domain.size());
  std::vector<std::int64_t> parent(domain.size());
  int searched = -1;
  for (const auto& in : residual.ports) {
    if (!in.inbound) continue;
    if (in.anchor != searched) {
      searched = in.anchor;
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::fill(parent.begin(), parent.end(), -1);
      using Item = std::pair<double, std::size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      for (const auto& p : pg.vertices[in.anchor].pixels) {
        dist[idx(p)] = 0.0;
        pq.push({0.0, idx(p)});
      }
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        const Pixel pu{static_cast<int>(u % W), static_cast<int>(u / W)};
        for (const auto& off : kRing) {
          const Pixel q{pu.i + off.i, pu.j + off.j};
          if (q.i < 0 || q.j < 0 || q.i >= W || q.j >= H || !domain[idx(q)]) continue;
          const Vec2 step = as_vec(q) - as_vec(pu);
          const double len = norm(step);
          double cost = len;
          if (auto flow = decode_direction(fm, q)) {
            cost += cfg.flow_penalty * len * (1.0 - dot(to_pixel_frame(*flow), step / len));
          }
          const std::size_t qi = idx(q);
          if (d + cost < dist[qi]) {
            dist[qi] = d + cost;
            parent[qi] = static_cast<std::int64_t>(u);
            pq.push({dist[qi], qi});
          }
        }
      }
    }

    for (const Port* out : exits) {
      if (comp[in.anchor] < 0 || comp[in.anchor] != comp[out->anchor]) continue;
      std::size_t target = 0;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pg.vertices[out->anchor].pixels) {
        if (dist[idx(p)] < best) {
          best = dist[idx(p)];
          target = idx(p);
        }
      }
      if (!std::isfinite(best)) continue;
      std::vector<Pixel> chain;
      for (std::int64_t u = static_cast<std::int64_t>(target); u >= 0; u = parent[u])
        chain.push_back({static_cast<int>(u % W), static_cast<int>(u / W)});
      std::reverse(chain.begin(), chain.end());

      CurveCandidate cand;
      cand.entry = in.vertex;
      cand.exit = out->vertex;
      auto append = [&cand](const std::vector<Vec2>& pts) {
        for (const auto& p : pts)
          if (cand.path.empty() || distance(cand.path.back(), p) > 1e-9) cand.path.push_back(p);
      };
      append(in.tail);
      if (in.anchor != out->anchor)
        append(chain_to_world(chain, pg.vertices[in.anchor].position, pg.vertices[out->anchor].position, fm));
      append(out->tail);
      if (cand.path.size() < 2) continue;
      cand.fit = fit_path(cand.path, in.tangent, out->tangent, fm.meters_per_pixel(), cfg.stroke);
      cand.accepted = cand.fit.accepted(cfg);
      if (cand.accepted) {
        auto pts = cand.fit.curve.flatten(cfg.resample_spacing);
        pts.front() = g.vertices[in.vertex].position;
        pts.back() = g.vertices[out->vertex].position;
        g.edges.push_back(DirectedEdge{in.vertex, out->vertex, Centerline{std::move(pts)}});
      }
      candidates.push_back(std::move(cand));
    }
  }
  return candidates;
}

VectorizeResult vectorize(const FeatureMap& fm, const VectorizeConfig& cfg) {
  const auto sk = skeletonize(fm);
  if (sk.count() == 0) throw Error(ErrorCode::EmptyMap, "feature map holds no lane pixels");
  const auto pg = extract_edges_vertices(sk);
  const auto labeled = label_terminals(pg, fm);
  auto extraction = extract_approach_edges(labeled, fm, cfg);

  VectorizeResult result;
  result.candidates = fit_intersection_curves(extraction.residual, extraction.graph, fm, cfg);

  // Keep only vertices that carry edges, preserving order.
  const auto& full = extraction.graph;
  std::vector<int> remap(full.vertices.size(), -1);
  for (const auto& e : full.edges) remap[e.from] = remap[e.to] = 0;
  for (std::size_t v = 0; v < full.vertices.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<int>(result.graph.vertices.size());
    result.graph.vertices.push_back(full.vertices[v]);
  }
  for (const auto& e : full.edges) {
    DirectedEdge de{remap[e.from], remap[e.to], {}};
    de.geometry.waypoints = resample_polyline(e.geometry.waypoints, cfg.resample_spacing);
    result.graph.edges.push_back(std::move(de));
  }
  for (auto& c : result.candidates) {
    c.entry = remap[c.entry];
    c.exit = remap[c.exit];
  }
  result.lanes = result.graph.centerlines();
  return result;
}

}  // namespace dsg
