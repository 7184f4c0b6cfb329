#include "dsg/graph_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <unordered_map>

#include "dsg/error.hpp"
#include "json.hpp"

namespace dsg {
namespace {

struct CandidatePair {
  double d;
  int gt;
  int pred;
};

std::vector<CandidatePair> candidate_pairs(const InterpolatedGraph& gt, const InterpolatedGraph& pred, double threshold) {
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  auto key = [threshold](Vec2 p, int di, int dj) {
    const auto ci = static_cast<std::int64_t>(std::floor(p.x / threshold)) + di;
    const auto cj = static_cast<std::int64_t>(std::floor(p.y / threshold)) + dj;
    return (ci << 32) ^ (cj & 0xffffffff);
  };
  for (int j = 0; j < static_cast<int>(pred.size()); ++j) grid[key(pred.vertices[j], 0, 0)].push_back(j);

  std::vector<CandidatePair> pairs;
  for (int i = 0; i < static_cast<int>(gt.size()); ++i) {
    const Vec2 p = gt.vertices[i];
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const auto it = grid.find(key(p, di, dj));
        if (it == grid.end()) continue;
        for (int j : it->second) {
          const double d = distance(p, pred.vertices[j]);
          if (d < threshold) pairs.push_back({d, i, j});
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const CandidatePair& a, const CandidatePair& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.pred < b.pred;
  });
  return pairs;
}

std::vector<std::pair<int, int>> greedy(const std::vector<CandidatePair>& pairs, std::size_t n_gt, std::size_t n_pred) {
  std::vector<bool> used_gt(n_gt, false);
  std::vector<bool> used_pred(n_pred, false);
  std::vector<std::pair<int, int>> out;
  for (const auto& c : pairs) {
    if (used_gt[c.gt] || used_pred[c.pred]) continue;
    used_gt[c.gt] = used_pred[c.pred] = true;
    out.emplace_back(c.gt, c.pred);
  }
  return out;
}

// Vertices within path distance `radius` of `source`, links treated as undirected.
class BallSearch {
 public:
  explicit BallSearch(const InterpolatedGraph& g) : g_(g), dist_(g.size(), 0.0), stamp_(g.size(), 0) {}

  const std::vector<int>& run(int source, double radius) {
    ++epoch_;
    members_.clear();
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    visit(source, 0.0);
    pq.push({0.0, source});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist_[u]) continue;
      for (const auto& link : g_.neighbours[u]) {
        const double nd = d + link.length;
        if (nd > radius) continue;
        if (stamp_[link.to] != epoch_ || nd < dist_[link.to]) {
          visit(link.to, nd);
          pq.push({nd, link.to});
        }
      }
    }
    return members_;
  }

  bool contains(int v) const { return stamp_[v] == epoch_; }

 private:
  void visit(int v, double d) {
    if (stamp_[v] != epoch_) members_.push_back(v);
    stamp_[v] = epoch_;
    dist_[v] = d;
  }

  const InterpolatedGraph& g_;
  std::vector<double> dist_;
  std::vector<unsigned> stamp_;
  std::vector<int> members_;
  unsigned epoch_ = 0;
};

void require_nonempty(const InterpolatedGraph& gt, const InterpolatedGraph& pred) {
  if (gt.size() == 0) throw Error(ErrorCode::EmptyGraph, "ground-truth graph has no vertices");
  if (pred.size() == 0) throw Error(ErrorCode::EmptyGraph, "predicted graph has no vertices");
}

}  // namespace

InterpolatedGraph interpolate_graph(std::span<const Centerline> lanes, double spacing, double merge_tolerance) {
  InterpolatedGraph g;
  g.spacing = spacing;
  std::vector<int> endpoints;
  auto add_vertex = [&](Vec2 p, int edge) {
    g.vertices.push_back(p);
    g.neighbours.emplace_back();
    g.edge_of.push_back(edge);
    return static_cast<int>(g.vertices.size()) - 1;
  };
  auto endpoint_vertex = [&](Vec2 p, int edge) {
    for (int v : endpoints) {
      if (distance(g.vertices[v], p) <= merge_tolerance) {
        g.edge_of[v] = -1;
        return v;
      }
    }
    const int v = add_vertex(p, edge);
    endpoints.push_back(v);
    return v;
  };
  auto link = [&](int a, int b) {
    if (a == b) return;
    const double len = distance(g.vertices[a], g.vertices[b]);
    g.neighbours[a].push_back({b, len});
    g.neighbours[b].push_back({a, len});
  };

  for (int e = 0; e < static_cast<int>(lanes.size()); ++e) {
    const auto pts = resample_polyline(lanes[e].waypoints, spacing);
    if (pts.empty()) continue;
    int prev = endpoint_vertex(pts.front(), e);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const int cur = k + 1 == pts.size() ? endpoint_vertex(pts[k], e) : add_vertex(pts[k], e);
      link(prev, cur);
      prev = cur;
    }
  }
  return g;
}

std::vector<std::pair<int, int>> match_vertices(const InterpolatedGraph& gt, const InterpolatedGraph& pred,
                                                double threshold) {
  return greedy(candidate_pairs(gt, pred, threshold), gt.size(), pred.size());
}

PrecisionRecall geo_score(const InterpolatedGraph& gt, const InterpolatedGraph& pred, double threshold) {
  require_nonempty(gt, pred);
  const auto m = static_cast<double>(match_vertices(gt, pred, threshold).size());
  return {m / static_cast<double>(pred.size()), m / static_cast<double>(gt.size())};
}

PrecisionRecall topo_score(const InterpolatedGraph& gt, const InterpolatedGraph& pred, double threshold,
                           double subgraph_radius) {
  require_nonempty(gt, pred);
  if (!(subgraph_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "subgraph radius must be positive");
  const auto pairs = candidate_pairs(gt, pred, threshold);
  const auto matches = greedy(pairs, gt.size(), pred.size());

  // Candidate pairs indexed by gt vertex, in global greedy order.
  std::vector<std::vector<int>> by_gt(gt.size());
  for (int k = 0; k < static_cast<int>(pairs.size()); ++k) by_gt[pairs[k].gt].push_back(k);

  BallSearch gt_ball(gt);
  BallSearch pred_ball(pred);
  std::vector<unsigned> used_gt(gt.size(), 0);
  std::vector<unsigned> used_pred(pred.size(), 0);
  std::vector<int> order;
  unsigned epoch = 0;
  double sum_precision = 0.0;
  double sum_recall = 0.0;
  for (const auto& [v, vh] : matches) {
    const auto& sub_gt = gt_ball.run(v, subgraph_radius);
    const auto& sub_pred = pred_ball.run(vh, subgraph_radius);
    order.clear();
    for (int i : sub_gt)
      for (int k : by_gt[i])
        if (pred_ball.contains(pairs[k].pred)) order.push_back(k);
    std::sort(order.begin(), order.end());
    ++epoch;
    std::size_t matched = 0;
    for (int k : order) {
      const auto& c = pairs[k];
      if (used_gt[c.gt] == epoch || used_pred[c.pred] == epoch) continue;
      used_gt[c.gt] = used_pred[c.pred] = epoch;
      ++matched;
    }
    sum_precision += static_cast<double>(matched) / static_cast<double>(sub_pred.size());
    sum_recall += static_cast<double>(matched) / static_cast<double>(sub_gt.size());
  }
  return {sum_precision / static_cast<double>(pred.size()), sum_recall / static_cast<double>(gt.size())};
}

GeoTopoScore evaluate(std::span<const Centerline> gt, std::span<const Centerline> pred, const EvalConfig& cfg) {
  const auto g = interpolate_graph(gt, cfg.interpolation);
  const auto p = interpolate_graph(pred, cfg.interpolation);
  require_nonempty(g, p);
  GeoTopoScore s;
  const auto matches = match_vertices(g, p, cfg.threshold);
  s.matched_count = static_cast<int>(matches.size());
  const PrecisionRecall geo{static_cast<double>(matches.size()) / static_cast<double>(p.size()),
                            static_cast<double>(matches.size()) / static_cast<double>(g.size())};
  const auto topo = topo_score(g, p, cfg.threshold, cfg.subgraph_radius);
  s.geo = {geo.precision, geo.recall, geo.f1()};
  s.topo = {topo.precision, topo.recall, topo.f1()};
  return s;
}

std::string format_score(const GeoTopoScore& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "GEO  precision %.4f  recall %.4f  F1 %.4f\n"
                "TOPO precision %.4f  recall %.4f  F1 %.4f\n"
                "matched vertices %d\n",
                s.geo.precision, s.geo.recall, s.geo.f1, s.topo.precision, s.topo.recall, s.topo.f1, s.matched_count);
  return buf;
}

std::string score_to_json(const GeoTopoScore& s) {
  nlohmann::ordered_json j;
  j["geo"] = {{"precision", s.geo.precision}, {"recall", s.geo.recall}, {"f1", s.geo.f1}};
  j["topo"] = {{"precision", s.topo.precision}, {"recall", s.topo.recall}, {"f1", s.topo.f1}};
  j["matched_count"] = s.matched_count;
  return j.dump(2) + "\n";
}

}  // namespace dsg
