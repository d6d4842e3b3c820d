// Copyright 2026 The ririnv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ririnv/core.hpp"
#include "ririnv/degradation.hpp"
#include "ririnv/evaluation.hpp"

// Scenario files are JSON. Every field has a default, so "{}" describes the
// plywood-cube setup with two loudspeakers and two microphones. Unknown keys
// are rejected rather than silently ignored.

namespace ririnv {

using Json = nlohmann::json;

struct RoomSpec {
  std::array<double, 3> dims{1.84, 1.79, 1.83};
  /// Exactly one of abar / reflection is used; abar wins when both are absent.
  std::optional<double> abar = 0.0407;
  std::optional<double> reflection;
  double speed_of_sound = kDefaultSpeedOfSound;
  double sample_rate = kDefaultSampleRate;
  std::size_t ir_length = kDefaultIrLength;

  RoomModel build() const {
    if (abar && reflection) {
      throw Error(ErrorKind::kConfig, "room: give either abar or reflection, not both");
    }
    if (reflection) return RoomModel(dims, *reflection, speed_of_sound, sample_rate, ir_length);
    return RoomModel::from_absorptivity(dims, abar.value_or(0.0407), speed_of_sound,
                                        sample_rate, ir_length);
  }
};

struct InversionSpec {
  double beta = 1e-2;
  double delay = 0.5;
  std::optional<double> tau = 0.06;
  std::size_t fft_length = 0;

  InversionConfig build() const { return InversionConfig(beta, delay, fft_length, tau); }
};

struct ScenarioConfig {
  RoomSpec room;
  std::vector<Point3> sources{{0.26, 0.30, -0.15}, {-0.26, -0.30, -0.15}};
  std::vector<Point3> receivers{{-0.57, 0.58, 0.31}, {-0.39, 0.58, 0.31}};
  InversionSpec inversion;
  double t_min = 0.0025;
  double early_window = 0.1;
  double mse_interval = 0.02;
  DegradationParams degradation;
  std::uint64_t seed = 0;

  EvalConfig eval_config() const {
    EvalConfig e;
    e.t_min = t_min;
    e.early_window = early_window;
    e.modeling_delay = inversion.delay;
    e.mse_interval = mse_interval;
    return e;
  }

  /// Builds every derived object once so bad values surface as config errors
  /// (geometry problems keep their own error kind).
  void validate() const {
    if (sources.empty() || receivers.empty()) {
      throw Error(ErrorKind::kConfig, "need at least one source and one receiver");
    }
    try {
      (void)inversion.build();
      eval_config().validate();
      degradation.validate();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kConfig) throw;
      throw Error(ErrorKind::kConfig, e.what());
    }
    RoomModel r = [&] {
      try {
        return room.build();
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kConfig) throw;
        throw Error(ErrorKind::kConfig, e.what());
      }
    }();
    validate_geometry(r, sources);
    validate_geometry(r, receivers);
  }
};

namespace detail {

inline Json point_json(const Point3& p) { return Json::array({p.x, p.y, p.z}); }

inline Point3 point_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::kConfig, where + ": expected [x, y, z]");
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorKind::kConfig, where + ": coordinates must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::kConfig, where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw Error(ErrorKind::kConfig, "unknown key " + where + "." + k);
  }
}

template <class T>
void read_number(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::kConfig, where + "." + key + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<double>() < 0) {
      throw Error(ErrorKind::kConfig, where + "." + key + " must be a non-negative integer");
    }
  }
  out = v.get<T>();
}

inline void read_optional(const Json& j, const char* key, std::optional<double>& out,
                          const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (v.is_null()) {
    out.reset();
  } else if (v.is_number()) {
    out = v.get<double>();
  } else {
    throw Error(ErrorKind::kConfig, where + "." + key + " must be a number or null");
  }
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["room"] = {{"dims", c.room.dims},
               {"abar", detail::optional_json(c.room.abar)},
               {"reflection", detail::optional_json(c.room.reflection)},
               {"speed_of_sound", c.room.speed_of_sound},
               {"sample_rate", c.room.sample_rate},
               {"ir_length", c.room.ir_length}};
  j["sources"] = Json::array();
  for (const auto& p : c.sources) j["sources"].push_back(detail::point_json(p));
  j["receivers"] = Json::array();
  for (const auto& p : c.receivers) j["receivers"].push_back(detail::point_json(p));
  j["inversion"] = {{"beta", c.inversion.beta},
                    {"delay", c.inversion.delay},
                    {"tau", detail::optional_json(c.inversion.tau)},
                    {"fft_length", c.inversion.fft_length}};
  j["eval"] = {{"t_min", c.t_min}, {"early_window", c.early_window},
               {"mse_interval", c.mse_interval}};
  j["degradation"] = {{"enabled", c.degradation.enabled},
                      {"wall_highpass_hz", c.degradation.wall_highpass_hz},
                      {"air_db_per_10khz_per_34m", c.degradation.air_db_per_10khz_per_34m},
                      {"abar_offset", c.degradation.abar_offset}};
  j["seed"] = c.seed;
  return j;
}

inline ScenarioConfig scenario_from_json(const Json& j) {
  ScenarioConfig c;
  detail::check_keys(j, {"room", "sources", "receivers", "inversion", "eval", "degradation", "seed"},
                     "config");
  if (j.contains("room")) {
    const auto& r = j["room"];
    detail::check_keys(r, {"dims", "abar", "reflection", "speed_of_sound", "sample_rate", "ir_length"},
                       "room");
    if (r.contains("dims")) {
      const Point3 d = detail::point_from(r["dims"], "room.dims");
      c.room.dims = {d.x, d.y, d.z};
    }
    // naming reflection alone drops the default abar
    if (r.contains("reflection") && !r.contains("abar")) c.room.abar.reset();
    detail::read_optional(r, "abar", c.room.abar, "room");
    detail::read_optional(r, "reflection", c.room.reflection, "room");
    detail::read_number(r, "speed_of_sound", c.room.speed_of_sound, "room");
    detail::read_number(r, "sample_rate", c.room.sample_rate, "room");
    detail::read_number(r, "ir_length", c.room.ir_length, "room");
  }
  for (const char* key : {"sources", "receivers"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_array()) throw Error(ErrorKind::kConfig, std::string(key) + " must be a list");
    auto& dst = std::string(key) == "sources" ? c.sources : c.receivers;
    dst.clear();
    for (std::size_t i = 0; i < j[key].size(); ++i) {
      dst.push_back(detail::point_from(j[key][i], std::string(key) + "[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("inversion")) {
    const auto& v = j["inversion"];
    detail::check_keys(v, {"beta", "delay", "tau", "fft_length"}, "inversion");
    detail::read_number(v, "beta", c.inversion.beta, "inversion");
    detail::read_number(v, "delay", c.inversion.delay, "inversion");
    detail::read_optional(v, "tau", c.inversion.tau, "inversion");
    detail::read_number(v, "fft_length", c.inversion.fft_length, "inversion");
  }
  if (j.contains("eval")) {
    const auto& v = j["eval"];
    detail::check_keys(v, {"t_min", "early_window", "mse_interval"}, "eval");
    detail::read_number(v, "t_min", c.t_min, "eval");
    detail::read_number(v, "early_window", c.early_window, "eval");
    detail::read_number(v, "mse_interval", c.mse_interval, "eval");
  }
  if (j.contains("degradation")) {
    const auto& v = j["degradation"];
    detail::check_keys(v, {"enabled", "wall_highpass_hz", "air_db_per_10khz_per_34m", "abar_offset"},
                       "degradation");
    if (v.contains("enabled")) {
      if (!v["enabled"].is_boolean()) throw Error(ErrorKind::kConfig, "degradation.enabled must be a bool");
      c.degradation.enabled = v["enabled"].get<bool>();
    }
    detail::read_number(v, "wall_highpass_hz", c.degradation.wall_highpass_hz, "degradation");
    detail::read_number(v, "air_db_per_10khz_per_34m", c.degradation.air_db_per_10khz_per_34m,
                        "degradation");
    detail::read_number(v, "abar_offset", c.degradation.abar_offset, "degradation");
  }
  detail::read_number(j, "seed", c.seed, "config");
  return c;
}

/// Applies "a.b.c=value" to a JSON tree. The value is parsed as JSON when it
/// can be (numbers, null, lists, true/false) and taken as a string otherwise.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::kConfig, "override must look like key=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw Error(ErrorKind::kConfig, "empty key segment in " + path);
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw Error(ErrorKind::kConfig, "cannot descend into " + parts[i]);
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) throw Error(ErrorKind::kConfig, "cannot set " + path);
  (*node)[parts.back()] = std::move(value);
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kIo, path.string() + ": cannot open");
  Json j = Json::parse(f, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::kConfig, path.string() + ": malformed JSON");
  return j;
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorKind::kIo, path.string() + ": cannot open for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error(ErrorKind::kIo, path.string() + ": write failed");
}

/// Loads a scenario (or the defaults when path is empty) and applies overrides.
inline ScenarioConfig load_scenario(const std::optional<std::filesystem::path>& path,
                                    const std::vector<std::string>& overrides = {}) {
  Json j = path ? read_json_file(*path) : Json::object();
  for (const auto& o : overrides) apply_override(j, o);
  ScenarioConfig c = scenario_from_json(j);
  c.validate();
  return c;
}

}  // namespace ririnv
