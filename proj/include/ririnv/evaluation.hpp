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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ririnv/core.hpp"

namespace ririnv {

struct EvalConfig {
  double t_min = 0.0025;          // s, half-width excluded around the target impulse
  double early_window = 0.100;    // s, horizon T of DR(T)
  double modeling_delay = 0.5;    // s, where the equalized impulse should sit
  double mse_interval = 0.020;    // s

  void validate() const {
    if (!(t_min > 0.0 && t_min < early_window)) {
      throw Error(ErrorKind::kInvalidArgument, "need 0 < t_min < early window");
    }
    if (!(modeling_delay >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "modeling delay must be non-negative");
    }
  }
};

/// A level in dB that may be +infinity (zero residual) without overflowing.
struct Decibels {
  double value = 0.0;
  bool infinite = false;

  static Decibels inf() { return {std::numeric_limits<double>::infinity(), true}; }
};

struct MsePoint {
  std::size_t start = 0;
  double error = 0.0;
};

/// Local mean-squared error over consecutive non-overlapping intervals,
/// each signal normalized by its own RMS within the interval. A trailing
/// partial interval is dropped.
inline std::vector<MsePoint> local_mse(const ImpulseResponse& sim, const ImpulseResponse& meas,
                                       std::size_t interval) {
  if (sim.size() != meas.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "local_mse needs equal lengths");
  }
  if (sim.sample_rate() != meas.sample_rate()) {
    throw Error(ErrorKind::kRateMismatch, "local_mse needs equal sample rates");
  }
  if (interval < 2) throw Error(ErrorKind::kInvalidArgument, "interval must be at least 2");
  std::vector<MsePoint> out;
  const auto a = sim.samples();
  const auto b = meas.samples();
  for (std::size_t k = 0; k + interval <= a.size(); k += interval) {
    double ea = 0.0;
    double eb = 0.0;
    for (std::size_t n = k; n < k + interval; ++n) {
      ea += a[n] * a[n];
      eb += b[n] * b[n];
    }
    if (ea == 0.0 || eb == 0.0) {
      throw Error(ErrorKind::kZeroRmsInterval,
                  "silent interval starting at sample " + std::to_string(k));
    }
    const double ra = std::sqrt(ea / static_cast<double>(interval));
    const double rb = std::sqrt(eb / static_cast<double>(interval));
    double acc = 0.0;
    for (std::size_t n = k; n < k + interval; ++n) {
      const double d = a[n] / ra - b[n] / rb;
      acc += d * d;
    }
    out.push_back({k, acc / static_cast<double>(interval)});
  }
  return out;
}

namespace detail {
inline std::int64_t to_samples(double seconds, double fs) {
  return static_cast<std::int64_t>(std::llround(seconds * fs));
}
}  // namespace detail

/// Residual energy of x_hat at t_min < |t - D| (< horizon), as a Riemann sum.
inline double residual_energy(const ImpulseResponse& x_hat, double t_min, double delay,
                              std::optional<double> horizon) {
  const double fs = x_hat.sample_rate();
  const std::int64_t lo = detail::to_samples(t_min, fs);
  const std::int64_t d = detail::to_samples(delay, fs);
  const std::int64_t hi = horizon ? detail::to_samples(*horizon, fs)
                                  : std::numeric_limits<std::int64_t>::max();
  double e = 0.0;
  const auto x = x_hat.samples();
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::int64_t off = std::abs(static_cast<std::int64_t>(n) - d);
    if (off > lo && off < hi) e += x[n] * x[n];
  }
  return e / fs;
}

/// Room-response energy over t_min < t (< horizon).
inline double reference_energy(const ImpulseResponse& g, double t_min,
                               std::optional<double> horizon) {
  return residual_energy(g, t_min, 0.0, horizon);
}

/// 10 log10 of the measured response energy after t_min over the residual
/// energy of the equalized output away from its target impulse at D.
/// `horizon` empty means DR(infinity).
inline Decibels dereverberation_ratio(const ImpulseResponse& g_meas,
                                      const ImpulseResponse& x_hat, const EvalConfig& cfg,
                                      std::optional<double> horizon) {
  cfg.validate();
  if (g_meas.sample_rate() != x_hat.sample_rate()) {
    throw Error(ErrorKind::kRateMismatch, "measured and equalized responses differ in rate");
  }
  const double num = reference_energy(g_meas, cfg.t_min, horizon);
  if (!(num > 0.0)) {
    throw Error(ErrorKind::kEmptyIntegrationRegion,
                "measured response has no energy in the integration region");
  }
  const double den = residual_energy(x_hat, cfg.t_min, cfg.modeling_delay, horizon);
  if (den == 0.0) return Decibels::inf();
  return {10.0 * std::log10(num / den), false};
}

/// Backward-integrated energy in dB relative to the total:
/// 10 log10(sum_{m>=n} g^2 / sum_m g^2). Non-increasing, starts at 0 dB;
/// -inf once the remaining energy is exactly zero.
inline std::vector<double> schroeder_curve(const ImpulseResponse& g) {
  const auto x = g.samples();
  std::vector<double> tail(x.size());
  double acc = 0.0;
  for (std::size_t i = x.size(); i-- > 0;) {
    acc += x[i] * x[i];
    tail[i] = acc;
  }
  if (!(acc > 0.0)) throw Error(ErrorKind::kZeroEnergy, "response has no energy");
  std::vector<double> db(x.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = tail[i] > 0.0 ? 10.0 * std::log10(tail[i] / acc)
                             : -std::numeric_limits<double>::infinity();
    // Round-off in the running sum must not make the curve rise.
    v = std::min(v, prev);
    db[i] = v;
    prev = v;
  }
  db[0] = 0.0;
  return db;
}

/// Reverberation time from a least-squares line through the Schroeder curve
/// between `upper_db` and `lower_db`, extrapolated to 60 dB of decay.
inline double reverberation_time(const ImpulseResponse& g, double upper_db = -5.0,
                                 double lower_db = -35.0) {
  const auto curve = schroeder_curve(g);
  const double fs = g.sample_rate();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  bool reached = false;
  for (std::size_t n = 0; n < curve.size(); ++n) {
    const double v = curve[n];
    if (v <= lower_db) {
      reached = true;
      break;
    }
    if (v > upper_db) continue;
    const double t = static_cast<double>(n) / fs;
    sx += t;
    sy += v;
    sxx += t * t;
    sxy += t * v;
    ++count;
  }
  if (!reached || count < 2) {
    throw Error(ErrorKind::kInsufficientDecay, "decay curve does not span the fit range");
  }
  const double cnt = static_cast<double>(count);
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  if (!(slope < 0.0)) throw Error(ErrorKind::kInsufficientDecay, "decay curve is not decaying");
  return -60.0 / slope;
}

struct RemainderTime {
  double seconds = 0.0;
  /// False when the level is only met past the final sample.
  bool reached = true;
};

/// Smallest T_L with 10 log10(E_g / sum_{t >= T_L} x_hat^2) >= level_db, where
/// E_g is the total energy of the measured response. Time is counted from
/// sample `origin` of x_hat (the modeling delay for equalized outputs).
inline RemainderTime remainder_reverberation_time(const ImpulseResponse& g_meas,
                                                  const ImpulseResponse& x_hat,
                                                  double level_db, std::size_t origin = 0) {
  if (!(level_db > 0.0)) throw Error(ErrorKind::kInvalidArgument, "level must be positive");
  const double ref = g_meas.energy();
  if (!(ref > 0.0)) throw Error(ErrorKind::kZeroEnergy, "measured response has no energy");
  const double threshold = ref * std::pow(10.0, -level_db / 10.0);
  const auto x = x_hat.samples();
  const double fs = x_hat.sample_rate();
  // Walk backwards accumulating the tail; the answer is the earliest start
  // whose tail is still within the threshold.
  double tail = 0.0;
  std::size_t first_ok = x.size();
  for (std::size_t i = x.size(); i-- > origin;) {
    tail += x[i] * x[i];
    if (tail > threshold) break;
    first_ok = i;
  }
  if (first_ok < origin) first_ok = origin;
  const double secs = static_cast<double>(first_ok - std::min(first_ok, origin)) / fs;
  return {secs, first_ok < x.size()};
}

/// abar = 0.161 V / (S T60).
inline double sabine_absorptivity(const std::array<double, 3>& dims, double t60) {
  for (double d : dims) {
    if (!(d > 0.0)) throw Error(ErrorKind::kInvalidArgument, "dimensions must be positive");
  }
  if (!(t60 > 0.0)) throw Error(ErrorKind::kInvalidArgument, "T60 must be positive");
  const double volume = dims[0] * dims[1] * dims[2];
  const double surface = 2.0 * (dims[0] * dims[1] + dims[1] * dims[2] + dims[0] * dims[2]);
  return 0.161 * volume / (surface * t60);
}

/// r = sqrt(1 - abar).
inline double reflection_from_absorptivity(double abar) {
  if (!(abar >= 0.0 && abar <= 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "absorptivity must lie in [0, 1]");
  }
  return std::sqrt(1.0 - abar);
}

/// Peak power of the target impulse over the mean power of every other
/// output sample (the noise floor), in dB.
inline Decibels impulse_snr(const ImpulseResponse& x_hat, std::size_t delay_samples) {
  if (delay_samples >= x_hat.size()) {
    throw Error(ErrorKind::kInvalidArgument, "delay lies beyond the output");
  }
  const double peak = x_hat[delay_samples] * x_hat[delay_samples];
  const double rest = x_hat.energy() - peak;
  if (x_hat.size() == 1 || !(rest > 0.0)) return Decibels::inf();
  const double floor = rest / static_cast<double>(x_hat.size() - 1);
  return {10.0 * std::log10(peak / floor), false};
}

/// Metrics for one control point.
struct EvalRow {
  std::size_t control_point = 0;
  Decibels dr_total;
  Decibels dr_early;
  double residual_energy_total = 0.0;
  double residual_energy_early = 0.0;
  Decibels snr;
  std::array<RemainderTime, 3> measured{};     // T10, T20, T60
  std::array<RemainderTime, 3> dereverberated{};
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::size_t delay_samples = 0;
  /// True when the plant came from the synthetic degradation proxy.
  bool synthetic_plant = false;
};

inline constexpr std::array<double, 3> kRemainderLevels{10.0, 20.0, 60.0};

inline EvalRow evaluate_control_point(std::size_t control_point, const ImpulseResponse& g_meas,
                                      const ImpulseResponse& x_hat, const EvalConfig& cfg) {
  cfg.validate();
  EvalRow row;
  row.control_point = control_point;
  row.dr_total = dereverberation_ratio(g_meas, x_hat, cfg, std::nullopt);
  row.dr_early = dereverberation_ratio(g_meas, x_hat, cfg, cfg.early_window);
  row.residual_energy_total = residual_energy(x_hat, cfg.t_min, cfg.modeling_delay, std::nullopt);
  row.residual_energy_early =
      residual_energy(x_hat, cfg.t_min, cfg.modeling_delay, cfg.early_window);
  const auto delay = static_cast<std::size_t>(detail::to_samples(cfg.modeling_delay, x_hat.sample_rate()));
  row.snr = impulse_snr(x_hat, delay);
  for (std::size_t i = 0; i < kRemainderLevels.size(); ++i) {
    row.measured[i] = remainder_reverberation_time(g_meas, g_meas, kRemainderLevels[i]);
    row.dereverberated[i] = remainder_reverberation_time(g_meas, x_hat, kRemainderLevels[i], delay);
  }
  return row;
}

}  // namespace ririnv
