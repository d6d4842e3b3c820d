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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ririnv/core.hpp"
#include "ririnv/degradation.hpp"
#include "ririnv/evaluation.hpp"
#include "ririnv/image_source.hpp"
#include "ririnv/inversion.hpp"
#include "ririnv/scenario.hpp"
#include "ririnv/wav.hpp"

// End-to-end glue: response sets on disk (WAV files plus manifest.json),
// evaluation with a unit impulse at each control point, parameter sweeps and
// the CSV reports.

namespace ririnv {

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kManifestFormat = "ririnv-manifest";

enum class SetKind { kSimulation, kDegraded, kFilters };

inline const char* to_string(SetKind k) {
  switch (k) {
    case SetKind::kSimulation: return "simulation";
    case SetKind::kDegraded: return "degraded";
    case SetKind::kFilters: return "filters";
  }
  return "?";
}

inline SetKind set_kind_from(const std::string& s) {
  if (s == "simulation") return SetKind::kSimulation;
  if (s == "degraded") return SetKind::kDegraded;
  if (s == "filters") return SetKind::kFilters;
  throw Error(ErrorKind::kConfig, "unknown manifest kind '" + s + "'");
}

/// Label written beside anything that came out of the degradation proxy.
inline constexpr const char* kSyntheticLabel = "SYNTHETIC degradation proxy, not measured data";
inline constexpr const char* kPlantSynthetic = "synthetic-proxy";
inline constexpr const char* kPlantClean = "clean-simulation";

/// ir_s{i}_r{j}.wav for responses, h_s{i}_r{j}.wav for filters.
inline std::string set_file_name(SetKind kind, std::size_t source, std::size_t receiver) {
  const char* prefix = kind == SetKind::kFilters ? "h" : "ir";
  return std::string(prefix) + "_s" + std::to_string(source) + "_r" + std::to_string(receiver) +
         ".wav";
}

struct ResponseSet {
  SetKind kind = SetKind::kSimulation;
  ScenarioConfig scenario;
  /// Responses are receivers x sources; filters are sources x receivers.
  TransferMatrix data{ImpulseResponse({0.0}, 1.0)};
  /// Extra fields kept verbatim (inversion diagnostics and the like).
  Json extra = Json::object();

  bool synthetic() const { return kind == SetKind::kDegraded; }
};

inline Json room_summary(const RoomModel& room) {
  Json walls = Json::array();
  for (double r : room.wall_reflection()) walls.push_back(r);
  return {{"dims", room.dims()},
          {"wall_reflection", walls},
          {"abar", room.mean_absorptivity()},
          {"speed_of_sound", room.speed_of_sound()},
          {"sample_rate", room.sample_rate()},
          {"ir_length", room.ir_length()},
          {"volume", room.volume()},
          {"surface_area", room.surface_area()}};
}

inline Json inversion_summary(const InverseFilterSet& inv) {
  const auto& cfg = inv.config;
  return {{"beta", cfg.beta()},
          {"delay_requested_s", cfg.modeling_delay()},
          {"delay_samples", inv.delay_samples},
          {"delay_applied_s", inv.applied_delay_seconds},
          {"tau", cfg.window_tau() ? Json(*cfg.window_tau()) : Json(nullptr)},
          {"fft_length", inv.fft_length},
          {"wraparound_energy_ratio", inv.wraparound_energy_ratio},
          {"wraparound_energy_ratio_max", inv.max_wraparound_ratio()}};
}

/// Writes every entry as a WAV plus manifest.json into dir (created).
inline void write_set(const std::filesystem::path& dir, const ResponseSet& set) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, dir.string() + ": " + ec.message());
  const bool filters = set.kind == SetKind::kFilters;
  Json files = Json::array();
  for (std::size_t r = 0; r < set.data.rows(); ++r) {
    for (std::size_t c = 0; c < set.data.cols(); ++c) {
      const std::size_t src = filters ? r : c;
      const std::size_t rcv = filters ? c : r;
      const std::string name = set_file_name(set.kind, src, rcv);
      wav::write(dir / name, set.data.at(r, c));
      files.push_back({{"source", src}, {"receiver", rcv}, {"path", name}});
    }
  }
  Json m;
  m["format"] = kManifestFormat;
  m["version"] = 1;
  m["kind"] = to_string(set.kind);
  m["synthetic"] = set.synthetic();
  m["label"] = set.synthetic() ? kSyntheticLabel : (filters ? "inverse filters" : "image-source simulation");
  m["scenario"] = to_json(set.scenario);
  m["room"] = room_summary(set.scenario.room.build());
  m["rows"] = set.data.rows();
  m["cols"] = set.data.cols();
  m["length"] = set.data.length();
  m["sample_rate"] = set.data.sample_rate();
  m["files"] = files;
  for (const auto& [k, v] : set.extra.items()) m[k] = v;
  write_json_file(dir / kManifestName, m);
}

/// Reads a set back. Geometry comes from the manifest, never file names.
inline ResponseSet read_set(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kIo, path.string() + ": manifest not found");
  }
  const Json m = read_json_file(path);
  if (!m.is_object() || m.value("format", "") != kManifestFormat) {
    throw Error(ErrorKind::kConfig, path.string() + ": not a ririnv manifest");
  }
  ResponseSet set;
  try {
    set.kind = set_kind_from(m.at("kind").get<std::string>());
    set.scenario = scenario_from_json(m.at("scenario"));
    const auto rows = m.at("rows").get<std::size_t>();
    const auto cols = m.at("cols").get<std::size_t>();
    std::vector<std::optional<ImpulseResponse>> slots(rows * cols);
    const bool filters = set.kind == SetKind::kFilters;
    for (const auto& f : m.at("files")) {
      const auto src = f.at("source").get<std::size_t>();
      const auto rcv = f.at("receiver").get<std::size_t>();
      const std::size_t r = filters ? src : rcv;
      const std::size_t c = filters ? rcv : src;
      if (r >= rows || c >= cols) throw Error(ErrorKind::kConfig, "file entry out of range");
      slots[r * cols + c] = wav::read(dir / f.at("path").get<std::string>());
    }
    std::vector<ImpulseResponse> entries;
    for (auto& s : slots) {
      if (!s) throw Error(ErrorKind::kConfig, path.string() + ": manifest misses an entry");
      entries.push_back(std::move(*s));
    }
    set.data = TransferMatrix(rows, cols, std::move(entries));
    for (const auto& [k, v] : m.items()) {
      if (k == "inversion") set.extra[k] = v;
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return set;
}

inline ResponseSet simulate_set(const ScenarioConfig& sc) {
  const RoomModel room = sc.room.build();
  return {SetKind::kSimulation, sc, simulate_matrix(room, sc.sources, sc.receivers), Json::object()};
}

/// Proxy "measured" set. With degradation disabled the entries equal the
/// clean simulation and the set is not labeled synthetic.
inline ResponseSet degrade_set(const ScenarioConfig& sc) {
  const RoomModel room = sc.room.build();
  if (!sc.degradation.enabled) return simulate_set(sc);
  return {SetKind::kDegraded, sc,
          simulate_degraded_matrix(room, sc.sources, sc.receivers, sc.degradation), Json::object()};
}

inline ResponseSet invert_set(const ResponseSet& model, const ScenarioConfig& sc,
                              InverseFilterSet* diagnostics = nullptr) {
  if (model.kind == SetKind::kFilters) {
    throw Error(ErrorKind::kDimensionMismatch, "cannot invert a filter set");
  }
  InverseFilterSet inv = invert(model.data, sc.inversion.build());
  ResponseSet out{SetKind::kFilters, sc, inv.filters, Json::object()};
  out.extra["inversion"] = inversion_summary(inv);
  if (diagnostics) *diagnostics = std::move(inv);
  return out;
}

/// Evaluates plant * filters with a unit impulse at one control point at a
/// time. Control point k is judged against plant(k, k mod L), the response
/// from the loudspeaker paired with that microphone.
inline EvalReport evaluate(const TransferMatrix& plant, const TransferMatrix& filters,
                           std::size_t delay_samples, EvalConfig cfg, bool synthetic_plant) {
  if (filters.rows() != plant.cols() || filters.cols() != plant.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "filters must be sources x control points");
  }
  const double fs = plant.sample_rate();
  cfg.modeling_delay = static_cast<double>(delay_samples) / fs;
  EvalReport report;
  report.delay_samples = delay_samples;
  report.synthetic_plant = synthetic_plant;
  const std::size_t m = plant.rows();
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<ImpulseResponse> input;
    input.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      input.push_back(i == k ? ImpulseResponse::delta(fs) : ImpulseResponse({0.0}, fs));
    }
    const auto y = apply(filters, plant, input);
    report.rows.push_back(evaluate_control_point(k, plant.at(k, k % plant.cols()), y[k], cfg));
  }
  return report;
}

inline EvalReport evaluate(const TransferMatrix& plant, const InverseFilterSet& inv,
                           const EvalConfig& cfg, bool synthetic_plant) {
  return evaluate(plant, inv.filters, inv.delay_samples, cfg, synthetic_plant);
}

/// Builds the inverse of `model` and evaluates it on `plant`.
inline EvalReport run_pipeline(const TransferMatrix& model, const TransferMatrix& plant,
                               const InversionConfig& inv_cfg, const EvalConfig& cfg,
                               bool synthetic_plant) {
  return evaluate(plant, invert(model, inv_cfg), cfg, synthetic_plant);
}

// ---- CSV ------------------------------------------------------------------

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string format_db(const Decibels& d) { return d.infinite ? "inf" : format_number(d.value); }

/// Unreached remainder times are written as "nan".
inline std::string format_remainder(const RemainderTime& t) {
  return t.reached ? format_number(t.seconds) : "nan";
}

inline constexpr const char* kEvalCsvHeader =
    "control_point,dr_total_db,dr_early_db,residual_energy_total,residual_energy_early,snr_db,"
    "t10_measured_s,t20_measured_s,t60_measured_s,t10_dereverb_s,t20_dereverb_s,t60_dereverb_s,"
    "delay_samples,plant";

inline const char* plant_label(bool synthetic) { return synthetic ? kPlantSynthetic : kPlantClean; }

inline void write_eval_csv(std::ostream& os, const EvalReport& report) {
  os << kEvalCsvHeader << '\n';
  for (const auto& r : report.rows) {
    os << r.control_point << ',' << format_db(r.dr_total) << ',' << format_db(r.dr_early) << ','
       << format_number(r.residual_energy_total) << ',' << format_number(r.residual_energy_early)
       << ',' << format_db(r.snr);
    for (const auto& t : r.measured) os << ',' << format_remainder(t);
    for (const auto& t : r.dereverberated) os << ',' << format_remainder(t);
    os << ',' << report.delay_samples << ',' << plant_label(report.synthetic_plant) << '\n';
  }
}

// ---- sweeps ---------------------------------------------------------------

enum class SweepParameter { kTau, kBeta, kAbar };

inline const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kTau: return "tau";
    case SweepParameter::kBeta: return "beta";
    case SweepParameter::kAbar: return "abar";
  }
  return "?";
}

inline SweepParameter sweep_parameter_from(const std::string& s) {
  if (s == "tau") return SweepParameter::kTau;
  if (s == "beta") return SweepParameter::kBeta;
  if (s == "abar") return SweepParameter::kAbar;
  throw Error(ErrorKind::kConfig, "sweep parameter must be tau, beta or abar");
}

struct SweepRow {
  double value = 0.0;
  std::size_t control_point = 0;
  Decibels dr_total;
  Decibels dr_early;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::kTau;
  bool synthetic_plant = false;
  std::vector<SweepRow> rows;
};

/// One pipeline run per value against a fixed plant (the degradation proxy
/// of `base`, or the clean simulation when degradation is off). Tau and beta
/// change the inversion; abar changes the modeled room only.
inline SweepResult run_sweep(const ScenarioConfig& base, SweepParameter param,
                             std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::kConfig, "a sweep needs at least two values");
  const ResponseSet plant = degrade_set(base);
  std::optional<TransferMatrix> model;
  if (param != SweepParameter::kAbar) model = simulate_set(base).data;

  SweepResult result;
  result.parameter = param;
  result.synthetic_plant = plant.synthetic();
  for (double v : values) {
    ScenarioConfig sc = base;
    TransferMatrix m = model ? *model : TransferMatrix(ImpulseResponse({1.0}, 1.0));
    switch (param) {
      case SweepParameter::kTau:
        sc.inversion.tau = v;
        break;
      case SweepParameter::kBeta:
        sc.inversion.beta = v;
        break;
      case SweepParameter::kAbar:
        sc.room.abar = v;
        sc.room.reflection.reset();
        m = simulate_set(sc).data;
        break;
    }
    const auto report = run_pipeline(m, plant.data, sc.inversion.build(), sc.eval_config(),
                                     plant.synthetic());
    for (const auto& r : report.rows) result.rows.push_back({v, r.control_point, r.dr_total, r.dr_early});
  }
  return result;
}

inline constexpr const char* kSweepCsvHeader =
    "parameter,value,control_point,dr_total_db,dr_early_db,plant";

inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : s.rows) {
    os << to_string(s.parameter) << ',' << format_number(r.value) << ',' << r.control_point << ','
       << format_db(r.dr_total) << ',' << format_db(r.dr_early) << ','
       << plant_label(s.synthetic_plant) << '\n';
  }
}

}  // namespace ririnv
