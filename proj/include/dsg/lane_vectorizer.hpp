#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dsg/bezier.hpp"
#include "dsg/raster_codec.hpp"
#include "dsg/scenario_model.hpp"
#include "dsg/skeletonizer.hpp"

namespace dsg {

enum class VertexLabel { Unlabeled, Entry, Exit };

const char* to_string(VertexLabel label);

struct LaneVertex {
  Waypoint position;
  Vec2 direction;  ///< unit flow direction, zero when unknown
  VertexLabel label = VertexLabel::Unlabeled;
};

struct DirectedEdge {
  int from = 0;
  int to = 0;
  Centerline geometry;  ///< starts at vertices[from], ends at vertices[to]
};

/// Directed lane graph in world coordinates.
struct LaneGraph {
  std::vector<LaneVertex> vertices;
  std::vector<DirectedEdge> edges;

  std::vector<int> out_edges(int v) const;
  std::vector<int> in_edges(int v) const;
  std::vector<Centerline> centerlines() const;
};

/// Builds a lane graph from centerlines, merging lane endpoints closer than
/// `merge_tolerance` meters into shared vertices.
LaneGraph lane_graph_from_centerlines(std::span<const Centerline> lanes, double merge_tolerance = 0.05);

struct VectorizeConfig {
  double k_thresh = 0.2;        ///< max curvature of an accepted intersection curve, 1/m
  double min_iou = 0.5;         ///< min stroke IoU between curve and source path
  int stroke = kDefaultStroke;  ///< stroke used for IoU rasterization, px
  double resample_spacing = 0.5;
  /// Extra path cost per pixel for stepping against the decoded flow
  /// (scaled by (1 − cos) of the misalignment).
  double flow_penalty = 4.0;
  /// Approach edges stop this far (m) short of their branching vertex; the
  /// skeleton bends into the junction over that stretch.
  double port_setback = 4.0;
};

/// Role of a terminal→branching edge.
struct ApproachEdge {
  int edge = 0;      ///< index into PixelGraph::edges
  int terminal = 0;  ///< degree-1 vertex
  int branch = 0;    ///< its neighbour
  /// True when traffic flows from the terminal towards the branching vertex
  /// (terminal and branch are entries), false when it flows outward (exits).
  bool inbound = true;
};

struct LabeledPixelGraph {
  PixelGraph graph;
  std::vector<VertexLabel> labels;                ///< per pixel-graph vertex
  std::vector<std::optional<Vec2>> directions;    ///< decoded direction per vertex
  std::vector<ApproachEdge> approaches;
  std::vector<bool> entry_role;                   ///< vertex ends an inbound approach
  std::vector<bool> exit_role;                    ///< vertex starts an outbound approach
};

/// Decodes vertex directions and labels every terminal and branching vertex
/// as entry or exit. The flow of an approach edge is the sign of the summed
/// agreement between decoded pixel directions and the edge tangent walking
/// from the terminal to its neighbour. A vertex pixel decoding to background
/// falls back to its 3×3 neighbourhood; MissingDirection if still empty.
LabeledPixelGraph label_terminals(const PixelGraph& pg, const FeatureMap& fm);

/// Where an approach edge meets an intersection.
struct Port {
  int vertex = 0;  ///< lane-graph vertex at the end of the approach edge
  int anchor = 0;  ///< branching vertex in the pixel graph
  bool inbound = true;
  /// Skeleton stretch between the port and its anchor, in travel direction.
  std::vector<Vec2> tail;
  Vec2 tangent;  ///< travel direction at the port (world)
};

/// What remains of the undirected graph once approach edges and terminals
/// are removed: the intersection regions.
struct ResidualGraph {
  PixelGraph graph;           ///< same vertex indexing as the labeled graph; approach edges dropped
  std::vector<bool> removed;  ///< terminal vertices taken out
  std::vector<bool> entry_role;
  std::vector<bool> exit_role;
  std::vector<Port> ports;
};

struct ApproachExtraction {
  /// Vertex i < pixel vertex count corresponds to pixel-graph vertex i;
  /// port vertices follow.
  LaneGraph graph;
  ResidualGraph residual;
};

ApproachExtraction extract_approach_edges(const LabeledPixelGraph& lpg, const FeatureMap& fm,
                                          const VectorizeConfig& cfg = {});

struct BezierFit {
  CubicBezier curve;
  double iou = 0.0;
  double max_curvature = 0.0;  ///< 1/m

  std::array<Vec2, 4> control_points() const { return curve.p; }
  bool accepted(const VectorizeConfig& cfg) const { return iou >= cfg.min_iou && max_curvature <= cfg.k_thresh; }
};

/// Fits a tangent-constrained cubic to a world-frame path and scores it
/// against the path with the stroke IoU at the given raster resolution.
BezierFit fit_path(std::span<const Vec2> path, Vec2 start_dir, Vec2 end_dir, double meters_per_pixel, int stroke);

struct CurveCandidate {
  int entry = 0;  ///< lane-graph vertex of the entry port
  int exit = 0;   ///< lane-graph vertex of the exit port
  std::vector<Vec2> path;  ///< world coordinates
  BezierFit fit;
  bool accepted = false;
};

/// For every (entry, exit) port pair whose anchors are connected in the
/// residual, fits a curve to the flow-guided path (entry tail, residual pixel
/// chain, exit tail) and adds accepted curves as directed edges to `g`.
/// Returns every candidate considered.
std::vector<CurveCandidate> fit_intersection_curves(const ResidualGraph& residual, LaneGraph& g,
                                                    const FeatureMap& fm, const VectorizeConfig& cfg = {});

struct VectorizeResult {
  LaneGraph graph;
  std::vector<Centerline> lanes;  ///< world-frame, resampled
  std::vector<CurveCandidate> candidates;
};

/// Full raster → lane graph pipeline. EmptyMap when the raster holds no lane pixels.
VectorizeResult vectorize(const FeatureMap& fm, const VectorizeConfig& cfg = {});

}  // namespace dsg
