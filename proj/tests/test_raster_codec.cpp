#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dsg/error.hpp"
#include "dsg/raster_codec.hpp"
#include "support.hpp"

using namespace dsg;
using namespace testing;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dsg_test_raster_" + name);
}

Scenario horizontal_lane(Vec2 dir) {
  Centerline c{{{-30, 0.2}, {30, 0.2}}};
  if (dir.x < 0) std::swap(c.waypoints[0], c.waypoints[1]);
  return scene_with({c});
}

}  // namespace

TEST_CASE("80 m at 256 pixels is 0.3125 m per pixel with a centered origin") {
  const FeatureMap fm = rasterize(horizontal_lane({1, 0}));
  CHECK(fm.meters_per_pixel() == doctest::Approx(0.3125));
  CHECK(fm.width() == 256);
  CHECK(fm.origin().x == doctest::Approx(-40 + 0.15625));
  CHECK(fm.origin().y == doctest::Approx(40 - 0.15625));
  const auto tf = WorldToPixel::for_scene(80, 256, 256);
  CHECK(tf.scale == doctest::Approx(256.0 / 80.0));
  const Vec2 w{12.3, -7.7};
  const Vec2 back = tf.invert(tf.apply(w));
  CHECK(back.x == doctest::Approx(w.x));
  CHECK(back.y == doctest::Approx(w.y));
  const Vec2 px = fm.world_to_pixel(w);
  const Vec2 again = fm.pixel_to_world(px);
  CHECK(again.x == doctest::Approx(w.x));
  CHECK(again.y == doctest::Approx(w.y));
}

TEST_CASE("lane pixels carry the direction encoding and background is 0.5") {
  const FeatureMap fm = rasterize(horizontal_lane({1, 0}));
  const Vec2 p = fm.world_to_pixel({0, 0.2});
  const Pixel on{static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
  CHECK(fm.at(0, on) == doctest::Approx(1.0));
  CHECK(fm.at(1, on) == doctest::Approx(0.5));
  CHECK(fm.at(2, on) == 0.0f);
  const Pixel off{5, 5};
  CHECK(fm.at(0, off) == 0.5f);
  CHECK(fm.at(1, off) == 0.5f);
  CHECK(fm.at(2, off) == 0.0f);
}

TEST_CASE("agent channel encodes speed and is zero elsewhere") {
  for (double v : {0.0, 15.0, 30.0}) {
    Scenario s = horizontal_lane({1, 0});
    s.agents.push_back(agent_at(10, 10, 0.4, v));
    const FeatureMap fm = rasterize(s);
    const Vec2 p = fm.world_to_pixel({10, 10});
    const Pixel c{static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
    CHECK(fm.at(2, c) == doctest::Approx(0.5 * (1 + v / 30.0)));
    CHECK(decode_speed(fm.at(2, c), 30.0) == doctest::Approx(v).epsilon(1e-6));
    CHECK(fm.at(2, {0, 0}) == 0.0f);
  }
  CHECK(encode_speed(30, 30) == 1.0f);
  CHECK(encode_speed(0, 30) == 0.5f);
}

TEST_CASE("agents leave the direction channels untouched") {
  Scenario s = horizontal_lane({1, 0});
  const FeatureMap bare = rasterize(s);
  s.agents.push_back(agent_at(0, 0.2, 0, 12));
  const FeatureMap with = rasterize(s);
  for (int j = 0; j < bare.height(); ++j) {
    for (int i = 0; i < bare.width(); ++i) {
      REQUIRE(bare.at(0, {i, j}) == with.at(0, {i, j}));
      REQUIRE(bare.at(1, {i, j}) == with.at(1, {i, j}));
    }
  }
}

TEST_CASE("decode_direction inverts the encoding") {
  auto d = decode_direction(1.0f, 0.5f);
  REQUIRE(d);
  CHECK(d->x == doctest::Approx(1.0));
  CHECK(d->y == doctest::Approx(0.0));
  CHECK_FALSE(decode_direction(0.5f, 0.5f));
  // Just below and above the presence threshold.
  CHECK_FALSE(decode_direction(0.5f + 0.149f, 0.5f));
  CHECK(decode_direction(0.5f + 0.151f, 0.5f));
}

TEST_CASE("360 degree sweep decodes within half a degree") {
  double worst = 0.0;
  for (int k = 0; k < 360; ++k) {
    const Vec2 u = unit_from_angle(deg(k));
    const auto [c1, c2] = encode_direction(u);
    const auto d = decode_direction(c1, c2);
    REQUIRE(d);
    CHECK(std::abs(norm(*d) - 1.0) <= 1e-6);
    worst = std::max(worst, angle_between(*d, u));
  }
  CHECK(worst <= deg(0.5));
}

TEST_CASE("straight segments decode to their direction inside the stroke") {
  for (int k = 0; k < 36; ++k) {
    const Vec2 u = unit_from_angle(deg(10.0 * k + 3.0));
    const Scenario s = scene_with({Centerline{{u * -30.0, u * 30.0}}});
    const FeatureMap fm = rasterize(s);
    const auto mask = lane_mask(fm);
    for (int j = 0; j < fm.height(); ++j) {
      for (int i = 0; i < fm.width(); ++i) {
        if (!mask[static_cast<std::size_t>(j) * fm.width() + i]) continue;
        const auto d = decode_direction(fm, {i, j});
        REQUIRE(d);
        CHECK(std::abs(norm(*d) - 1.0) <= 1e-6);
        CHECK(angle_between(*d, u) <= deg(2.0));
      }
    }
  }
}

TEST_CASE("later lanes overwrite earlier ones where they cross") {
  const Scenario s = scene_with({Centerline{{{-20, 0.2}, {20, 0.2}}}, Centerline{{{0.2, -20}, {0.2, 20}}}});
  const FeatureMap fm = rasterize(s);
  const Vec2 p = fm.world_to_pixel({0.2, 0.2});
  const auto d = decode_direction(fm, {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))});
  REQUIRE(d);
  CHECK(d->y == doctest::Approx(1.0));
}

TEST_CASE("rasterize rejects geometry outside the range square") {
  const Scenario s = scene_with({Centerline{{{-50, 0}, {10, 0}}}});
  try {
    rasterize(s);
    FAIL("expected OutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
}

TEST_CASE("rasterize is deterministic") {
  Scenario s = horizontal_lane({-1, 0});
  s.agents.push_back(agent_at(-5, 0.2, kPi, 8));
  CHECK(rasterize(s) == rasterize(s));
}

TEST_CASE("binary raster format round-trips exactly") {
  Scenario s = horizontal_lane({1, 0});
  s.agents.push_back(agent_at(3, 0.2, 0, 21));
  const FeatureMap fm = rasterize(s, 64, 64);
  const auto bytes = encode_raster(fm);
  REQUIRE(bytes.size() == 16 + 3 * 64 * 64 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DSGF");
  CHECK(bytes[4] == 64);
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 3);
  CHECK(decode_raster(bytes) == fm);

  const auto path = temp_file("roundtrip.dsgf");
  write_raster(fm, path);
  CHECK(read_raster(path) == fm);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt raster bytes are rejected") {
  std::vector<std::uint8_t> bytes{'N', 'O', 'P', 'E'};
  CHECK_THROWS_AS(decode_raster(bytes), Error);
  auto good = encode_raster(rasterize(horizontal_lane({1, 0}), 16, 16));
  good.resize(good.size() - 3);
  CHECK_THROWS_AS(decode_raster(good), Error);
  CHECK_THROWS_AS(read_raster(temp_file("missing.dsgf")), Error);
}

TEST_CASE("background PNG is (128, 128, 0) and 1.0 maps to 255") {
  const FeatureMap bg = FeatureMap::background(8, 8, 1.0);
  const auto path = temp_file("bg.png");
  render_png(bg, path);
  const FeatureMap back = load_png(path, 1.0);
  CHECK(back.at(0, {3, 3}) == doctest::Approx(128.0 / 255.0));
  CHECK(back.at(1, {3, 3}) == doctest::Approx(128.0 / 255.0));
  CHECK(back.at(2, {3, 3}) == 0.0f);

  FeatureMap one = bg;
  one.at(0, {1, 1}) = 1.0f;
  render_png(one, path);
  CHECK(load_png(path, 1.0).at(0, {1, 1}) == 1.0f);
  std::filesystem::remove(path);
}

TEST_CASE("PNG round-trip is within one quantization step") {
  Scenario s = scene_with({Centerline{arc({-40, -40}, 50, 0.1, 1.4, 60)}});
  s.agents.push_back(agent_at(0, 0, 0.7, 17.3));
  const FeatureMap fm = rasterize(s);
  const auto path = temp_file("rt.png");
  render_png(fm, path);
  const FeatureMap back = load_png(path, fm.meters_per_pixel());
  REQUIRE(back.data().size() == fm.data().size());
  double worst = 0.0;
  for (std::size_t k = 0; k < fm.data().size(); ++k)
    worst = std::max(worst, static_cast<double>(std::abs(fm.data()[k] - back.data()[k])));
  CHECK(worst <= 1.0 / 255.0);
  std::filesystem::remove(path);
}
