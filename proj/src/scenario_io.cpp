#include "dsg/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "dsg/error.hpp"
#include "json.hpp"

namespace dsg {
namespace {

using json = nlohmann::ordered_json;

json point(double x, double y) { return json::array({x, y}); }

json agent_to_json(const Agent& a) {
  json j;
  j["x"] = a.initial_state.x;
  j["y"] = a.initial_state.y;
  j["heading"] = a.initial_state.heading;
  j["speed"] = a.initial_state.speed;
  j["length"] = a.length;
  j["width"] = a.width;
  if (a.trajectory) {
    json traj = json::array();
    for (const auto& s : *a.trajectory) traj.push_back(json::array({s.x, s.y, s.heading, s.speed}));
    j["trajectory"] = std::move(traj);
  }
  return j;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, "field '" + field + "' must be a number");
  return j.get<double>();
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "'" + where + "' must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, "missing field '" + where + (where.empty() ? "" : ".") + key + "'");
  return *it;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["range"] = s.range;
  j["v_max"] = s.v_max;
  j["dt"] = s.dt;
  json lanes = json::array();
  for (const auto& lane : s.lanes) {
    json pts = json::array();
    for (const auto& p : lane.waypoints) pts.push_back(point(p.x, p.y));
    lanes.push_back(std::move(pts));
  }
  j["lanes"] = std::move(lanes);
  json agents = json::array();
  for (const auto& a : s.agents) agents.push_back(agent_to_json(a));
  j["agents"] = std::move(agents);
  json meta = json::object();
  for (const auto& [k, v] : s.metadata) meta[k] = v;
  j["provenance"] = std::move(meta);
  return j.dump(1) + "\n";
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "top level must be an object");

  const auto version = number(member(j, "schema_version", ""), "schema_version");
  if (version != kSchemaVersion)
    throw Error(ErrorCode::SchemaVersionMismatch,
                "expected schema_version " + std::to_string(kSchemaVersion) + ", found " + member(j, "schema_version", "").dump());

  Scenario s;
  s.range = number(member(j, "range", ""), "range");
  s.v_max = number(member(j, "v_max", ""), "v_max");
  if (j.contains("dt")) s.dt = number(j["dt"], "dt");

  const auto& lanes = member(j, "lanes", "");
  if (!lanes.is_array()) throw Error(ErrorCode::ParseError, "field 'lanes' must be an array");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::string where = "lanes[" + std::to_string(i) + "]";
    if (!lanes[i].is_array()) throw Error(ErrorCode::ParseError, "field '" + where + "' must be an array");
    Centerline c;
    for (std::size_t k = 0; k < lanes[i].size(); ++k) {
      const auto& p = lanes[i][k];
      const std::string pw = where + "[" + std::to_string(k) + "]";
      if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::ParseError, "field '" + pw + "' must be [x, y]");
      c.waypoints.push_back({number(p[0], pw + "[0]"), number(p[1], pw + "[1]")});
    }
    s.lanes.push_back(std::move(c));
  }

  const auto& agents = member(j, "agents", "");
  if (!agents.is_array()) throw Error(ErrorCode::ParseError, "field 'agents' must be an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const auto& aj = agents[i];
    Agent a;
    a.initial_state.x = number(member(aj, "x", where), where + ".x");
    a.initial_state.y = number(member(aj, "y", where), where + ".y");
    a.initial_state.heading = number(member(aj, "heading", where), where + ".heading");
    a.initial_state.speed = number(member(aj, "speed", where), where + ".speed");
    a.length = number(member(aj, "length", where), where + ".length");
    a.width = number(member(aj, "width", where), where + ".width");
    if (a.initial_state.speed < 0.0 || a.initial_state.speed > s.v_max)
      throw Error(ErrorCode::ParseError, "agent " + std::to_string(i) + ": speed outside [0, v_max]");
    if (aj.contains("trajectory")) {
      const auto& tj = aj["trajectory"];
      if (!tj.is_array()) throw Error(ErrorCode::ParseError, "field '" + where + ".trajectory' must be an array");
      std::vector<AgentState> traj;
      for (std::size_t k = 0; k < tj.size(); ++k) {
        const std::string tw = where + ".trajectory[" + std::to_string(k) + "]";
        if (!tj[k].is_array() || tj[k].size() != 4)
          throw Error(ErrorCode::ParseError, "field '" + tw + "' must be [x, y, heading, speed]");
        traj.push_back({number(tj[k][0], tw), number(tj[k][1], tw), number(tj[k][2], tw), number(tj[k][3], tw)});
      }
      a.trajectory = std::move(traj);
    }
    s.agents.push_back(std::move(a));
  }

  if (j.contains("provenance")) {
    const auto& meta = j["provenance"];
    if (!meta.is_object()) throw Error(ErrorCode::ParseError, "field 'provenance' must be an object");
    for (const auto& [k, v] : meta.items()) {
      if (!v.is_string()) throw Error(ErrorCode::ParseError, "field 'provenance." + k + "' must be a string");
      s.metadata[k] = v.get<std::string>();
    }
  }

  try {
    validate_scenario(s, false);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return s;
}

void write_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << serialize_scenario(s);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Scenario read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace dsg
