#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dsg/raster_codec.hpp"

namespace dsg {

inline constexpr int kMinSpurLength = 5;

/// Binary image, row-major, 1 = foreground.
struct SkeletonMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool contains(Pixel p) const { return p.i >= 0 && p.j >= 0 && p.i < width && p.j < height; }
  bool at(Pixel p) const { return contains(p) && bits[static_cast<std::size_t>(p.j) * width + p.i] != 0; }
  void set(Pixel p, bool v) { bits[static_cast<std::size_t>(p.j) * width + p.i] = v ? 1 : 0; }
  std::size_t count() const;
  bool operator==(const SkeletonMask&) const = default;
};

/// Number of foreground pixels among the 8 neighbours of p.
int neighbour_count(const SkeletonMask& m, Pixel p);

struct PixelVertex {
  Vec2 position;              ///< pixel coordinates, centroid of `pixels`
  std::vector<Pixel> pixels;  ///< merged junction cluster or single terminal pixel
  int degree = 0;             ///< number of incident edge ends
  bool on_border = false;     ///< touches the outermost pixel ring
};

struct PixelEdge {
  int from = 0;
  int to = 0;
  /// Anchor pixel in `from`'s cluster, the vertex-free interior, then the
  /// anchor pixel in `to`'s cluster.
  std::vector<Pixel> path;

  std::size_t interior_size() const { return path.size() >= 2 ? path.size() - 2 : 0; }
};

struct PixelGraph {
  int width = 0;
  int height = 0;
  std::vector<PixelVertex> vertices;
  std::vector<PixelEdge> edges;

  /// Indices of edges incident to vertex v.
  std::vector<int> incident(int v) const;
  bool empty() const { return vertices.empty(); }
};

/// Zhang–Suen thinning of a binary mask to a fixpoint, followed by removal of
/// redundant staircase pixels and pruning of spurs shorter than kMinSpurLength.
SkeletonMask skeletonize_mask(const SkeletonMask& input);

/// Thins the lane-presence mask of a feature map.
SkeletonMask skeletonize(const FeatureMap& fm);

/// Builds the undirected pixel graph of a one-pixel-wide skeleton. Pixels with
/// exactly one foreground neighbour are terminals, pixels with three or more
/// are junctions; 8-connected junction pixels merge into one vertex.
PixelGraph extract_edges_vertices(const SkeletonMask& sk);

/// Debug overlay: skeleton white, terminals green, junctions red.
void render_skeleton_png(const SkeletonMask& sk, const PixelGraph& pg, const std::filesystem::path& path);

}  // namespace dsg
