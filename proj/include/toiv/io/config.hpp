#pragma once

/**
 * @file config.hpp
 * @brief JSON (de)serialization of scenarios and run configuration.
 *
 * Scenario document:
 *
 *   {
 *     "name": "single",
 *     "radius": 0.2, "horizon": 1.0, "steps": 480, "epsilon": 0.01,
 *     "initial": {"p1": [-1, -2], "p2": [-1, -1], "v1": [0, 0], "v2": [0, 0]},
 *     "wall": {"level": 1.0},              // optional
 *     "initial_control": [0, 3],           // constant, or
 *     "initial_controls": [[0, 3], ...],   // one entry per step
 *     "contact": {...}, "optimizer": {...} // optional run defaults
 *   }
 *
 * Missing scalar fields take the defaults of the C++ structs. Field errors
 * name the offending path.
 */

#include "toiv/opt/optimizer.hpp"
#include "toiv/sim/scenarios.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace toiv::io {

using nlohmann::json;

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError("field '" + path + "': expected a number");
  }
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw ConfigError("field '" + path + "': expected an integer");
  }
  return j.get<int>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw ConfigError("field '" + path + "': expected true or false");
  }
  return j.get<bool>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError("field '" + path + "': expected a string");
  }
  return j.get<std::string>();
}

inline Vec2d vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError("field '" + path + "': expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Vec2d& v) { return json::array({v.x, v.y}); }

template <class F>
void optional_field(const json& obj, const std::string& path, const char* key, F&& apply) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
    apply(*it, join(path, key));
  }
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError("field '" + (path.empty() ? std::string("<root>") : path) + "': expected an object");
  }
}

} // namespace detail

inline json to_json(const ScenarioConfig& s) {
  json j;
  j["name"] = s.name;
  j["radius"] = s.radius;
  j["horizon"] = s.horizon;
  j["steps"] = s.steps;
  j["epsilon"] = s.epsilon;
  j["initial"] = {{"p1", detail::to_json(s.initial.p1)},
                  {"p2", detail::to_json(s.initial.p2)},
                  {"v1", detail::to_json(s.initial.v1)},
                  {"v2", detail::to_json(s.initial.v2)}};
  j["wall"] = s.wall ? json{{"level", s.wall->level}} : json(nullptr);
  json controls = json::array();
  for (const auto& u : s.initial_controls) {
    controls.push_back(detail::to_json(u));
  }
  j["initial_controls"] = std::move(controls);
  return j;
}

//! Builds a scenario from a document. Validation runs last, so a missing
//! control sequence or a bad step count is reported as a ConfigError.
inline ScenarioConfig scenario_from_json(const json& j, const std::string& path = "") {
  using namespace detail;
  require_object(j, path);
  ScenarioConfig s;
  s.initial_controls.clear();
  optional_field(j, path, "name", [&](const json& v, const std::string& p) { s.name = string(v, p); });
  optional_field(j, path, "radius", [&](const json& v, const std::string& p) { s.radius = number(v, p); });
  optional_field(j, path, "horizon", [&](const json& v, const std::string& p) { s.horizon = number(v, p); });
  optional_field(j, path, "steps", [&](const json& v, const std::string& p) { s.steps = integer(v, p); });
  optional_field(j, path, "epsilon", [&](const json& v, const std::string& p) { s.epsilon = number(v, p); });
  optional_field(j, path, "initial", [&](const json& v, const std::string& p) {
    require_object(v, p);
    optional_field(v, p, "p1", [&](const json& x, const std::string& q) { s.initial.p1 = vec2(x, q); });
    optional_field(v, p, "p2", [&](const json& x, const std::string& q) { s.initial.p2 = vec2(x, q); });
    optional_field(v, p, "v1", [&](const json& x, const std::string& q) { s.initial.v1 = vec2(x, q); });
    optional_field(v, p, "v2", [&](const json& x, const std::string& q) { s.initial.v2 = vec2(x, q); });
  });
  optional_field(j, path, "wall", [&](const json& v, const std::string& p) {
    require_object(v, p);
    Wall w;
    optional_field(v, p, "level", [&](const json& x, const std::string& q) { w.level = number(x, q); });
    s.wall = w;
  });
  if (s.steps < 1) {
    throw ConfigError("field '" + join(path, "steps") + "': must be >= 1");
  }
  optional_field(j, path, "initial_control", [&](const json& v, const std::string& p) {
    s.initial_controls.assign(static_cast<std::size_t>(s.steps), vec2(v, p));
  });
  optional_field(j, path, "initial_controls", [&](const json& v, const std::string& p) {
    if (!v.is_array()) {
      throw ConfigError("field '" + p + "': expected an array of [x, y]");
    }
    s.initial_controls.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      s.initial_controls.push_back(vec2(v[i], p + "[" + std::to_string(i) + "]"));
    }
  });
  if (s.initial_controls.empty()) {
    s.initial_controls.assign(static_cast<std::size_t>(s.steps), Vec2d{0.0, 0.0});
  }
  s.validate();
  return s;
}

inline json to_json(const ContactConfig& c) {
  return {{"model", std::string(to_string(c.model))},
          {"toi_position", c.toi_position},
          {"toi_velocity", c.toi_velocity},
          {"toi_solver", std::string(to_string(c.toi_solver))},
          {"stiffness", c.stiffness},
          {"damping", c.damping},
          {"penetration_tolerance", c.penetration_tolerance},
          {"approach_tolerance", c.approach_tolerance}};
}

inline ContactConfig contact_from_json(const json& j, const std::string& path = "contact") {
  using namespace detail;
  require_object(j, path);
  ContactConfig c;
  optional_field(j, path, "model", [&](const json& v, const std::string& p) {
    c.model = parse_contact_model(string(v, p));
    if (c.model != ContactModel::DirectImpulse) {
      c.toi_position = c.toi_velocity = false;
    }
  });
  optional_field(j, path, "toi_position", [&](const json& v, const std::string& p) { c.toi_position = boolean(v, p); });
  optional_field(j, path, "toi_velocity", [&](const json& v, const std::string& p) { c.toi_velocity = boolean(v, p); });
  optional_field(j, path, "toi_solver",
                 [&](const json& v, const std::string& p) { c.toi_solver = parse_toi_solver(string(v, p)); });
  optional_field(j, path, "stiffness", [&](const json& v, const std::string& p) { c.stiffness = number(v, p); });
  optional_field(j, path, "damping", [&](const json& v, const std::string& p) { c.damping = number(v, p); });
  optional_field(j, path, "penetration_tolerance",
                 [&](const json& v, const std::string& p) { c.penetration_tolerance = number(v, p); });
  optional_field(j, path, "approach_tolerance",
                 [&](const json& v, const std::string& p) { c.approach_tolerance = number(v, p); });
  c.validate();
  return c;
}

inline json to_json(const OptimizerConfig& o) {
  return {{"method", std::string(to_string(o.method))},
          {"learning_rate", o.learning_rate},
          {"momentum", o.momentum},
          {"iterations", o.iterations},
          {"grad_stop", o.grad_stop ? json(*o.grad_stop) : json(nullptr)},
          {"snapshot_every", o.snapshot_every}};
}

inline OptimizerConfig optimizer_from_json(const json& j, const std::string& path = "optimizer") {
  using namespace detail;
  require_object(j, path);
  OptimizerConfig o;
  optional_field(j, path, "method",
                 [&](const json& v, const std::string& p) { o.method = parse_optimizer_method(string(v, p)); });
  optional_field(j, path, "learning_rate", [&](const json& v, const std::string& p) { o.learning_rate = number(v, p); });
  optional_field(j, path, "momentum", [&](const json& v, const std::string& p) { o.momentum = number(v, p); });
  optional_field(j, path, "iterations", [&](const json& v, const std::string& p) { o.iterations = integer(v, p); });
  optional_field(j, path, "grad_stop", [&](const json& v, const std::string& p) { o.grad_stop = number(v, p); });
  optional_field(j, path, "snapshot_every",
                 [&](const json& v, const std::string& p) { o.snapshot_every = integer(v, p); });
  o.validate();
  return o;
}

inline json to_json(const ObjectiveConfig& o) {
  return {{"epsilon", o.epsilon}, {"target", detail::to_json(o.target)}};
}

inline ObjectiveConfig objective_from_json(const json& j, const std::string& path = "objective") {
  using namespace detail;
  require_object(j, path);
  ObjectiveConfig o;
  optional_field(j, path, "epsilon", [&](const json& v, const std::string& p) { o.epsilon = number(v, p); });
  optional_field(j, path, "target", [&](const json& v, const std::string& p) { o.target = vec2(v, p); });
  if (!(o.epsilon >= 0.0)) {
    throw ConfigError("field '" + join(path, "epsilon") + "': must be >= 0");
  }
  return o;
}

//! Reads and parses a JSON file; syntax errors carry line and column.
inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open '" + path.string() + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

//! A scenario file together with the optional run defaults it carries.
struct ScenarioDocument {
  ScenarioConfig scenario;
  std::optional<ContactConfig> contact;
  std::optional<OptimizerConfig> optimizer;
};

inline ScenarioDocument scenario_document_from_json(const json& j) {
  ScenarioDocument doc;
  doc.scenario = scenario_from_json(j);
  if (auto it = j.find("contact"); it != j.end() && !it->is_null()) {
    doc.contact = contact_from_json(*it);
  }
  if (auto it = j.find("optimizer"); it != j.end() && !it->is_null()) {
    doc.optimizer = optimizer_from_json(*it);
  }
  return doc;
}

//! Built-in name ("single", "multi") or path to a scenario document.
inline ScenarioDocument load_scenario_document(const std::string& name_or_path) {
  if (name_or_path == "single") {
    return {scenarios::single_collision(), std::nullopt, std::nullopt};
  }
  if (name_or_path == "multi") {
    return {scenarios::multi_collision(), std::nullopt, std::nullopt};
  }
  return scenario_document_from_json(read_json_file(name_or_path));
}

inline ScenarioConfig load_scenario(const std::string& name_or_path) {
  return load_scenario_document(name_or_path).scenario;
}

} // namespace toiv::io
