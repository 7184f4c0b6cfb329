#pragma once

#include <span>
#include <vector>

#include "dsg/raster_codec.hpp"

namespace dsg {

struct AgentDetection {
  Waypoint center;
  double heading = 0.0;  ///< radians, [-pi, pi)
  double length = 0.0;   ///< meters, along the heading
  double width = 0.0;    ///< meters
  double speed = 0.0;    ///< meters/second, in [0, v_max]
  int pixel_count = 0;
  /// No lane flow near the box; the heading is one of the two axis directions.
  bool heading_ambiguous = false;
};

struct AgentExtractConfig {
  double presence = 0.25;  ///< channel-3 value above which a pixel belongs to an agent
  int min_area = 6;        ///< smallest component kept, pixels
  double v_max = kDefaultVMax;
  double min_fill = 0.6;  ///< components filling less of their rectangle are split in two
  int lane_search = 4;    ///< pixels around the box searched for lane flow
};

struct OrientedRect {
  Vec2 center;
  Vec2 axis;  ///< unit vector along the longer side
  double length = 0.0;
  double width = 0.0;

  double area() const { return length * width; }
};

/// Smallest-area enclosing rectangle (convex hull + rotating calipers).
/// Degenerate inputs give zero extents.
OrientedRect min_area_rect(std::span<const Vec2> points);

/// Connected components of the agent channel, each fitted with an oriented
/// box. Box extents count whole pixels, so a component spanning n pixel
/// centers along an axis measures n pixels.
std::vector<AgentDetection> extract_agents(const FeatureMap& fm, const AgentExtractConfig& cfg = {});

/// Detections converted to scenario agents.
std::vector<Agent> to_agents(std::span<const AgentDetection> detections);

}  // namespace dsg
