#include "dsg/raster_codec.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dsg/error.hpp"

namespace dsg {
namespace {

constexpr char kMagic[4] = {'D', 'S', 'G', 'F'};
constexpr std::size_t kHeaderSize = 16;

Vec2 centered_origin(int width, int height, double mpp) {
  return {-0.5 * width * mpp + 0.5 * mpp, 0.5 * height * mpp - 0.5 * mpp};
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return std::bit_cast<float>(bits);
}

void draw_segment(FeatureMap& fm, const WorldToPixel& tf, Vec2 a, Vec2 b, double radius_px, Vec2 dir) {
  const Vec2 pa = tf.apply(a);
  const Vec2 pb = tf.apply(b);
  const auto [c1, c2] = encode_direction(dir);
  const int i0 = std::max(0, static_cast<int>(std::floor(std::min(pa.x, pb.x) - radius_px)));
  const int i1 = std::min(fm.width() - 1, static_cast<int>(std::ceil(std::max(pa.x, pb.x) + radius_px)));
  const int j0 = std::max(0, static_cast<int>(std::floor(std::min(pa.y, pb.y) - radius_px)));
  const int j1 = std::min(fm.height() - 1, static_cast<int>(std::ceil(std::max(pa.y, pb.y) + radius_px)));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (segment_distance({double(i), double(j)}, pa, pb) <= radius_px) {
        fm.at(0, {i, j}) = c1;
        fm.at(1, {i, j}) = c2;
      }
    }
  }
}

void draw_agent(FeatureMap& fm, const WorldToPixel& tf, const Agent& agent, float value) {
  const auto& st = agent.initial_state;
  const Vec2 fwd = unit_from_angle(st.heading);
  const Vec2 left = perp(fwd);
  const double hl = agent.length / 2.0;
  const double hw = agent.width / 2.0;
  const Vec2 c = st.position();
  Vec2 lo{1e300, 1e300};
  Vec2 hi{-1e300, -1e300};
  for (double sl : {-hl, hl}) {
    for (double sw : {-hw, hw}) {
      const Vec2 p = tf.apply(c + fwd * sl + left * sw);
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  }
  const int i0 = std::max(0, static_cast<int>(std::floor(lo.x)));
  const int i1 = std::min(fm.width() - 1, static_cast<int>(std::ceil(hi.x)));
  const int j0 = std::max(0, static_cast<int>(std::floor(lo.y)));
  const int j1 = std::min(fm.height() - 1, static_cast<int>(std::ceil(hi.y)));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 d = tf.invert({double(i), double(j)}) - c;
      if (std::abs(dot(d, fwd)) <= hl && std::abs(dot(d, left)) <= hw) fm.at(2, {i, j}) = value;
    }
  }
}

}  // namespace

FeatureMap::FeatureMap(int width, int height, double meters_per_pixel)
    : FeatureMap(width, height, meters_per_pixel, centered_origin(width, height, meters_per_pixel)) {}

FeatureMap::FeatureMap(int width, int height, double meters_per_pixel, Vec2 origin)
    : width_(width), height_(height), meters_per_pixel_(meters_per_pixel), origin_(origin) {
  if (width <= 0 || height <= 0 || !(meters_per_pixel > 0.0))
    throw Error(ErrorCode::InvalidArgument, "feature map needs positive size and resolution");
  data_.assign(kChannels * plane_size(), 0.0f);
}

FeatureMap FeatureMap::background(int width, int height, double meters_per_pixel) {
  FeatureMap fm(width, height, meters_per_pixel);
  std::fill(fm.data_.begin(), fm.data_.begin() + 2 * fm.plane_size(), kDirectionBackground);
  return fm;
}

Vec2 FeatureMap::pixel_to_world(Vec2 px) const {
  return {origin_.x + px.x * meters_per_pixel_, origin_.y - px.y * meters_per_pixel_};
}

Vec2 FeatureMap::world_to_pixel(Vec2 w) const {
  return {(w.x - origin_.x) / meters_per_pixel_, (origin_.y - w.y) / meters_per_pixel_};
}

WorldToPixel WorldToPixel::for_scene(double range, int width, int height) {
  WorldToPixel tf;
  tf.scale = width / range;
  tf.translation = {0.5 * width - 0.5, 0.5 * height - 0.5};
  return tf;
}

FeatureMap rasterize(const Scenario& s, int width, int height, int stroke) {
  if (width != height) throw Error(ErrorCode::InvalidArgument, "raster must be square");
  if (stroke < 1 || stroke % 2 == 0) throw Error(ErrorCode::InvalidArgument, "stroke must be odd and >= 1");
  try {
    validate_scenario(s, true);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfRange)
      throw Error(ErrorCode::OutOfRange, std::string(e.what()) + " (normalize the scenario first)");
    throw;
  }

  FeatureMap fm = FeatureMap::background(width, height, s.range / width);
  const auto tf = WorldToPixel::for_scene(s.range, width, height);
  const double radius = stroke / 2.0;
  for (const auto& lane : s.lanes) {
    const auto dirs = polyline_directions(lane);
    for (std::size_t k = 0; k + 1 < lane.waypoints.size(); ++k)
      draw_segment(fm, tf, lane.waypoints[k], lane.waypoints[k + 1], radius, dirs[k]);
  }
  for (const auto& agent : s.agents) draw_agent(fm, tf, agent, encode_speed(agent.initial_state.speed, s.v_max));
  return fm;
}

std::optional<Vec2> decode_direction(float c1, float c2) {
  const Vec2 v{2.0 * c1 - 1.0, 2.0 * c2 - 1.0};
  const double n = norm(v);
  if (!(n >= kLanePresenceThreshold)) return std::nullopt;
  return v / n;
}

std::optional<Vec2> decode_direction(const FeatureMap& fm, Pixel px) {
  if (!fm.contains(px)) throw Error(ErrorCode::OutOfRange, "pixel outside raster");
  return decode_direction(fm.at(0, px), fm.at(1, px));
}

std::vector<std::uint8_t> lane_mask(const FeatureMap& fm) {
  std::vector<std::uint8_t> mask(fm.plane_size(), 0);
  const auto& d = fm.data();
  const std::size_t n = fm.plane_size();
  for (std::size_t k = 0; k < n; ++k) mask[k] = decode_direction(d[k], d[n + k]).has_value() ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> encode_raster(const FeatureMap& fm) {
  if (fm.width() > 0xffff || fm.height() > 0xffff) throw Error(ErrorCode::InvalidArgument, "raster too large");
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.reserve(kHeaderSize + fm.data().size() * 4);
  put_u16(out, static_cast<std::uint16_t>(fm.width()));
  put_u16(out, static_cast<std::uint16_t>(fm.height()));
  put_u16(out, kChannels);
  put_u16(out, 0);
  put_f32(out, static_cast<float>(fm.meters_per_pixel()));
  for (float v : fm.data()) put_f32(out, v);
  return out;
}

FeatureMap decode_raster(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::ParseError, "not a DSGF raster");
  const int w = get_u16(bytes.data() + 4);
  const int h = get_u16(bytes.data() + 6);
  const int c = get_u16(bytes.data() + 8);
  const float mpp = get_f32(bytes.data() + 12);
  if (c != kChannels) throw Error(ErrorCode::ParseError, "expected 3 channels, found " + std::to_string(c));
  if (w == 0 || h == 0 || !(mpp > 0.0f)) throw Error(ErrorCode::ParseError, "invalid raster header");
  const std::size_t n = static_cast<std::size_t>(w) * h * c;
  if (bytes.size() != kHeaderSize + 4 * n) throw Error(ErrorCode::ParseError, "raster payload size mismatch");
  FeatureMap fm(w, h, mpp);
  for (std::size_t k = 0; k < n; ++k) fm.data()[k] = get_f32(bytes.data() + kHeaderSize + 4 * k);
  return fm;
}

void write_raster(const FeatureMap& fm, const std::filesystem::path& path) {
  const auto bytes = encode_raster(fm);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

FeatureMap read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_raster(bytes);
}

void write_rgb_png(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, "png write failed for " + path.string() + ": " + image.message);
}

void render_png(const FeatureMap& fm, const std::filesystem::path& path) {
  std::vector<std::uint8_t> rgb(fm.plane_size() * 3);
  for (int j = 0; j < fm.height(); ++j) {
    for (int i = 0; i < fm.width(); ++i) {
      for (int c = 0; c < kChannels; ++c) {
        const double v = std::clamp(static_cast<double>(fm.at(c, {i, j})), 0.0, 1.0);
        rgb[(static_cast<std::size_t>(j) * fm.width() + i) * 3 + c] = static_cast<std::uint8_t>(std::lround(255.0 * v));
      }
    }
  }
  write_rgb_png(path, fm.width(), fm.height(), rgb);
}

FeatureMap load_png(const std::filesystem::path& path, double meters_per_pixel) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(ErrorCode::IoError, "png read failed for " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::IoError, "png decode failed for " + path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  FeatureMap fm(w, h, meters_per_pixel);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      for (int c = 0; c < kChannels; ++c)
        fm.at(c, {i, j}) = rgb[(static_cast<std::size_t>(j) * w + i) * 3 + c] / 255.0f;
  return fm;
}

}  // namespace dsg
