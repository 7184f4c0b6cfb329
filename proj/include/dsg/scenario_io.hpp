#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsg/scenario_model.hpp"

namespace dsg {

inline constexpr int kSchemaVersion = 1;

/// Canonical JSON text of a scenario: fixed key order, shortest round-trip
/// number formatting. write→read→write is byte-identical.
std::string serialize_scenario(const Scenario& s);

/// Parses and validates scenario text. ParseError names the offending line
/// or field; SchemaVersionMismatch for other schema versions.
Scenario parse_scenario(const std::string& text);

void write_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario read_scenario(const std::filesystem::path& path);

enum class Template { Straight, Curved, TJunction, XJunction, Merge };

const char* to_string(Template t);
Template template_from_string(const std::string& name);

struct CorpusConfig {
  double range = kDefaultRange;
  double v_max = kDefaultVMax;
  /// Scenario count per template, generated in this order.
  std::vector<std::pair<Template, int>> counts;
  int max_agents = 6;
  double lane_width = 3.5;

  /// Reads {"range": .., "v_max": .., "max_agents": .., "templates": {"x-junction": 10, ...}}.
  static CorpusConfig from_json(const std::string& text);
  /// An even mix over all templates totalling `total` scenarios.
  static CorpusConfig mixed(int total, double range = kDefaultRange);
};

/// Deterministic synthetic scenarios; each is normalized and valid.
std::vector<Scenario> generate_synthetic_corpus(const CorpusConfig& cfg, std::uint64_t seed);

/// One scenario of a given template, seeded independently.
Scenario generate_scenario(Template t, const CorpusConfig& cfg, std::uint64_t seed);

}  // namespace dsg
