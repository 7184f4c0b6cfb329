#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsg/error.hpp"
#include "dsg/scenario_io.hpp"
#include "support.hpp"

using namespace dsg;
using namespace testing;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dsg_test_io_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario sample_scene() {
  Scenario s = scene_with({Centerline{{{-30, 0.1}, {30, 0.1}}}, Centerline{arc({0, 0}, 20, 0.1, 1.3, 17)}});
  s.agents.push_back(agent_at(-10, 0.1, 0.0, 12.345678901234));
  s.agents.push_back(agent_at(5, 0.1, 0.01, 0.0, 4.2, 1.9));
  s.agents[1].trajectory = std::vector<AgentState>{s.agents[1].initial_state, {5.1, 0.1, 0.01, 0.0}};
  return s;
}

ErrorCode parse_error_of(const std::string& text, std::string* what = nullptr) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

bool meets(const std::vector<Centerline>& lanes, Vec2 p, bool at_start) {
  for (const auto& l : lanes)
    if (distance(at_start ? l.waypoints.front() : l.waypoints.back(), p) < 1e-9) return true;
  return false;
}

}  // namespace

TEST_CASE("write then read returns an equal scenario and rewrites identical bytes") {
  const Scenario s = sample_scene();
  const auto path = temp_file("rt.json");
  write_scenario(s, path);
  const Scenario back = read_scenario(path);
  CHECK(back == s);
  const auto again = temp_file("rt2.json");
  write_scenario(back, again);
  CHECK(slurp(path) == slurp(again));
  CHECK(serialize_scenario(parse_scenario(serialize_scenario(s))) == serialize_scenario(s));
  std::filesystem::remove(path);
  std::filesystem::remove(again);
}

TEST_CASE("every corpus scenario round-trips exactly") {
  for (const auto& s : generate_synthetic_corpus(CorpusConfig::mixed(25), 3)) {
    const std::string text = serialize_scenario(s);
    CHECK(parse_scenario(text) == s);
    CHECK(serialize_scenario(parse_scenario(text)) == text);
  }
}

TEST_CASE("truncated text is a ParseError") {
  const std::string text = serialize_scenario(sample_scene());
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, text.size() / 3, text.size() / 2, text.size() - 2})
    CHECK(parse_error_of(text.substr(0, cut)) == ErrorCode::ParseError);
  CHECK_THROWS_AS(read_scenario(temp_file("missing.json")), Error);
}

TEST_CASE("a speed above v_max is a ParseError naming the agent") {
  Scenario s = sample_scene();
  s.agents[1].initial_state.speed = 31.0;
  std::string what;
  CHECK(parse_error_of(serialize_scenario(s), &what) == ErrorCode::ParseError);
  CHECK(what.find("agent 1") != std::string::npos);
}

TEST_CASE("another schema version is rejected") {
  std::string text = serialize_scenario(sample_scene());
  const auto pos = text.find("\"schema_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 19, "\"schema_version\": 2");
  CHECK(parse_error_of(text) == ErrorCode::SchemaVersionMismatch);
}

TEST_CASE("missing or mistyped fields are ParseErrors") {
  CHECK(parse_error_of("{}") == ErrorCode::ParseError);
  CHECK(parse_error_of("[1, 2]") == ErrorCode::ParseError);
  std::string text = serialize_scenario(sample_scene());
  const auto pos = text.find("\"lanes\"");
  text.replace(pos, 7, "\"lames\"");
  CHECK(parse_error_of(text) == ErrorCode::ParseError);
}

TEST_CASE("corpus generation is deterministic and seed-dependent") {
  const auto cfg = CorpusConfig::mixed(20);
  const auto a = generate_synthetic_corpus(cfg, 42);
  const auto b = generate_synthetic_corpus(cfg, 42);
  REQUIRE(a.size() == 20);
  CHECK(a == b);
  CHECK(generate_synthetic_corpus(cfg, 43) != a);
}

TEST_CASE("a zero count gives an empty corpus") {
  CHECK(generate_synthetic_corpus(CorpusConfig::mixed(0), 1).empty());
  CorpusConfig cfg;
  cfg.counts = {{Template::XJunction, 0}};
  CHECK(generate_synthetic_corpus(cfg, 1).empty());
}

TEST_CASE("X-junction template: 4 arms in and out, turn connectors, agents on lanes") {
  const CorpusConfig cfg = CorpusConfig::mixed(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scenario s = generate_scenario(Template::XJunction, cfg, seed);
    // Approaches are fed by no lane, exits feed no lane.
    std::vector<const Centerline*> inbound, outbound, connectors;
    for (const auto& l : s.lanes) {
      if (!meets(s.lanes, l.waypoints.front(), false)) inbound.push_back(&l);
      else if (!meets(s.lanes, l.waypoints.back(), true)) outbound.push_back(&l);
      else connectors.push_back(&l);
    }
    for (const auto* in : inbound) {
      const Vec2 p = in->waypoints.front();
      CHECK(std::max(std::abs(p.x), std::abs(p.y)) >= 0.9 * s.range / 2);
    }
    CHECK(inbound.size() == 4);
    CHECK(outbound.size() == 4);
    CHECK(connectors.size() == 12);
    // Each connector links the end of an approach to the start of an exit.
    for (const auto* c : connectors) {
      bool from = false, to = false;
      for (const auto* in : inbound) from |= distance(in->waypoints.back(), c->waypoints.front()) < 1e-9;
      for (const auto* out : outbound) to |= distance(out->waypoints.front(), c->waypoints.back()) < 1e-9;
      CHECK(from);
      CHECK(to);
    }
    for (const auto& a : s.agents) {
      double best = 1e300;
      for (const auto& l : s.lanes)
        for (std::size_t k = 1; k < l.waypoints.size(); ++k)
          best = std::min(best, segment_distance(a.initial_state.position(), l.waypoints[k - 1], l.waypoints[k]));
      CHECK(best <= 0.5);
    }
  }
}

TEST_CASE("generated scenarios are valid and normalized") {
  CorpusConfig cfg = CorpusConfig::mixed(40);
  for (const auto& s : generate_synthetic_corpus(cfg, 9)) {
    CHECK_NOTHROW(validate_scenario(s, true));
    CHECK(normalize_scenario(s) == s);
    CHECK(s.range == cfg.range);
    CHECK(static_cast<int>(s.agents.size()) <= cfg.max_agents);
  }
}

TEST_CASE("corpus config parses template counts") {
  const auto cfg = CorpusConfig::from_json(R"({"range": 40, "templates": {"x-junction": 2, "straight": 1}})");
  CHECK(cfg.range == 40.0);
  const auto corpus = generate_synthetic_corpus(cfg, 5);
  CHECK(corpus.size() == 3);
  for (const auto& s : corpus) CHECK(s.range == 40.0);
  CHECK(template_from_string(to_string(Template::Merge)) == Template::Merge);
  CHECK_THROWS_AS(template_from_string("roundabout"), Error);
  CHECK_THROWS_AS(CorpusConfig::from_json("{nope"), Error);
}
