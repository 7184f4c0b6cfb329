#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dsg/geometry.hpp"
#include "dsg/scenario_model.hpp"

namespace dsg {

inline constexpr int kChannels = 3;
inline constexpr int kDefaultResolution = 256;
inline constexpr int kDefaultStroke = 3;
/// Minimum ‖2C−1‖ over channels 1–2 for a pixel to count as lane.
inline constexpr double kLanePresenceThreshold = 0.3;
inline constexpr float kDirectionBackground = 0.5f;

/// Integer pixel address: column `i` grows with world x, row `j` grows with
/// decreasing world y (north-up image).
struct Pixel {
  int i = 0;
  int j = 0;
  bool operator==(const Pixel&) const = default;
};

/// W×H×3 BEV raster. Channels 0 and 1 carry the lane direction encoding,
/// channel 2 the agent speed encoding. Values produced by `rasterize` lie in
/// [0, 1]; diffusion intermediates stored in the same container may not.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int width, int height, double meters_per_pixel);
  FeatureMap(int width, int height, double meters_per_pixel, Vec2 origin);

  /// Map filled with the background encoding (0.5, 0.5, 0).
  static FeatureMap background(int width, int height, double meters_per_pixel);

  int width() const { return width_; }
  int height() const { return height_; }
  double meters_per_pixel() const { return meters_per_pixel_; }
  /// World coordinate of the center of pixel (0, 0).
  Vec2 origin() const { return origin_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }

  bool contains(Pixel p) const { return p.i >= 0 && p.j >= 0 && p.i < width_ && p.j < height_; }

  float at(int c, Pixel p) const { return data_[index(c, p)]; }
  float& at(int c, Pixel p) { return data_[index(c, p)]; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  Vec2 pixel_to_world(Vec2 px) const;
  Vec2 pixel_center(Pixel p) const { return pixel_to_world({double(p.i), double(p.j)}); }
  /// Continuous pixel coordinates; integer values address pixel centers.
  Vec2 world_to_pixel(Vec2 w) const;

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t index(int c, Pixel p) const {
    return static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(p.j) * width_ + p.i;
  }

  int width_ = 0;
  int height_ = 0;
  double meters_per_pixel_ = 1.0;
  Vec2 origin_;
  std::vector<float> data_;
};

/// Affine world→pixel transform for a centered scene of side `range`.
struct WorldToPixel {
  double scale = 1.0;  ///< pixels per meter, W / R
  Vec2 translation;    ///< pixel coordinate of the world origin

  static WorldToPixel for_scene(double range, int width, int height);
  Vec2 apply(Vec2 w) const { return {w.x * scale + translation.x, translation.y - w.y * scale}; }
  Vec2 invert(Vec2 px) const { return {(px.x - translation.x) / scale, (translation.y - px.y) / scale}; }
};

/// Encodes a unit direction as channel values 0.5·(1 + d).
inline std::pair<float, float> encode_direction(Vec2 unit) {
  return {static_cast<float>(0.5 * (1.0 + unit.x)), static_cast<float>(0.5 * (1.0 + unit.y))};
}

inline float encode_speed(double speed, double v_max) {
  return static_cast<float>(0.5 * (1.0 + speed / v_max));
}

inline double decode_speed(double c3, double v_max) {
  return std::clamp((2.0 * c3 - 1.0) * v_max, 0.0, v_max);
}

/// Draws lanes (direction channels) and agent boxes (speed channel). The
/// scenario must already be normalized; geometry outside the range square
/// raises OutOfRange.
FeatureMap rasterize(const Scenario& s, int width = kDefaultResolution, int height = kDefaultResolution,
                     int stroke = kDefaultStroke);

/// Inverse of the direction encoding at one pixel; nullopt on background.
std::optional<Vec2> decode_direction(const FeatureMap& fm, Pixel px);

/// Same decode applied to raw channel values.
std::optional<Vec2> decode_direction(float c1, float c2);

/// Row-major foreground mask of lane pixels (1 = lane).
std::vector<std::uint8_t> lane_mask(const FeatureMap& fm);

/// Binary raster container: "DSGF", u16 W, u16 H, u16 C, u16 reserved,
/// f32 meters_per_pixel, then C little-endian f32 planes in row-major order.
/// The origin is not stored; readers assume a scene centered on (0, 0).
void write_raster(const FeatureMap& fm, const std::filesystem::path& path);
FeatureMap read_raster(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_raster(const FeatureMap& fm);
FeatureMap decode_raster(const std::vector<std::uint8_t>& bytes);

/// 8-bit RGB export, byte = round(255·clamp(value, 0, 1)).
void render_png(const FeatureMap& fm, const std::filesystem::path& path);
/// Loads a PNG written by render_png back into a centered feature map.
FeatureMap load_png(const std::filesystem::path& path, double meters_per_pixel);

/// Writes an 8-bit RGB image (row-major, 3 bytes per pixel).
void write_rgb_png(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);

}  // namespace dsg
