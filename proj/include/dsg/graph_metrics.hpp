#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsg/scenario_model.hpp"

namespace dsg {

/// Lane graph densified at a fixed spacing. Lane endpoints that coincide
/// become a single vertex, so connectivity between lanes is preserved.
struct InterpolatedGraph {
  struct Link {
    int to = 0;
    double length = 0.0;
  };
  std::vector<Vec2> vertices;
  std::vector<std::vector<Link>> neighbours;  ///< undirected along-path links
  std::vector<int> edge_of;                   ///< source lane index per vertex (-1 for shared endpoints)
  double spacing = 0.5;

  std::size_t size() const { return vertices.size(); }
};

InterpolatedGraph interpolate_graph(std::span<const Centerline> lanes, double spacing = 0.5,
                                    double merge_tolerance = 1e-3);

/// One-to-one (gt, pred) vertex pairs, chosen greedily by ascending distance
/// among pairs closer than `threshold`; ties broken by (gt, pred) index.
std::vector<std::pair<int, int>> match_vertices(const InterpolatedGraph& gt, const InterpolatedGraph& pred,
                                                double threshold);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1() const { return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0; }
};

struct MetricTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct GeoTopoScore {
  MetricTriple geo;
  MetricTriple topo;
  int matched_count = 0;
};

/// Vertex-matching precision |matched|/|pred| and recall |matched|/|gt|.
PrecisionRecall geo_score(const InterpolatedGraph& gt, const InterpolatedGraph& pred, double threshold);

/// Geo scores of the radius-limited subgraphs around every matched pair,
/// summed and normalized by |pred| (precision) and |gt| (recall).
PrecisionRecall topo_score(const InterpolatedGraph& gt, const InterpolatedGraph& pred, double threshold,
                           double subgraph_radius);

struct EvalConfig {
  double threshold = 1.5;       ///< vertex pairing distance, m
  double interpolation = 0.5;   ///< densification spacing, m
  double subgraph_radius = 50;  ///< path distance of a TOPO subgraph, m
};

GeoTopoScore evaluate(std::span<const Centerline> gt, std::span<const Centerline> pred, const EvalConfig& cfg = {});

std::string format_score(const GeoTopoScore& s);
std::string score_to_json(const GeoTopoScore& s);

}  // namespace dsg
