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
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "ririnv/core.hpp"
#include "ririnv/image_source.hpp"

// Synthetic stand-in for a measured room response. The clean image-source
// model ignores frequency-dependent wall reflection and air absorption; this
// module re-runs the image engine with both effects applied per arrival so
// the "measured" response drifts away from the model as time goes on. It is
// test plumbing, not acoustics: every output that uses it is labeled.

namespace ririnv {

struct DegradationParams {
  bool enabled = true;
  /// Corner of the first-order high-pass applied once per wall reflection.
  double wall_highpass_hz = 100.0;
  /// Air attenuation at 10 kHz after 34.3 m of travel, in dB; scales with
  /// distance and with frequency squared.
  double air_db_per_10khz_per_34m = 8.0;
  /// Added to the room's mean absorptivity before simulating.
  double abar_offset = 0.0;

  void validate() const {
    if (!(wall_highpass_hz >= 0.0) || !(air_db_per_10khz_per_34m >= 0.0) ||
        !(abar_offset >= 0.0)) {
      throw Error(ErrorKind::kConfig, "degradation parameters must be non-negative");
    }
  }
};

inline constexpr double kAirReferenceDistance = 34.3;
inline constexpr double kAirReferenceFrequency = 10000.0;

/// Air attenuation in dB for a given frequency and path length.
inline double air_attenuation_db(const DegradationParams& p, double freq_hz, double distance_m) {
  const double f = freq_hz / kAirReferenceFrequency;
  return p.air_db_per_10khz_per_34m * f * f * distance_m / kAirReferenceDistance;
}

/// Room with every wall's energy reflectance lowered by `abar_offset`.
inline RoomModel offset_absorption(const RoomModel& room, double abar_offset) {
  if (abar_offset == 0.0) return room;
  std::array<double, 6> r = room.wall_reflection();
  for (double& w : r) w = std::sqrt(std::clamp(w * w - abar_offset, 0.0, 1.0));
  return RoomModel(room.dims(), r, room.speed_of_sound(), room.sample_rate(), room.ir_length());
}

namespace detail {

// One wall bounce: H(z) = (1+a)/2 (1 - z^-1) / (1 - a z^-1).
class WallHighpass {
 public:
  WallHighpass(double corner_hz, double fs)
      : a_(std::exp(-2.0 * std::numbers::pi * corner_hz / fs)), b_(0.5 * (1.0 + a_)) {}

  void run(std::vector<double>& x) const {
    double prev_in = 0.0;
    double prev_out = 0.0;
    for (double& v : x) {
      const double out = b_ * (v - prev_in) + a_ * prev_out;
      prev_in = v;
      prev_out = out;
      v = out;
    }
  }

 private:
  double a_;
  double b_;
};

inline constexpr int kAirKernelHalf = 48;
inline constexpr int kAirGrid = 256;
inline constexpr std::size_t kAirBlock = 32;

// Zero-phase FIR whose response follows the air attenuation at `distance`,
// sampled on a 256-point frequency grid.
inline std::vector<double> air_kernel(const DegradationParams& p, double distance, double fs) {
  std::vector<double> gain(kAirGrid);
  for (int q = 0; q < kAirGrid; ++q) {
    const double f = static_cast<double>(std::min(q, kAirGrid - q)) * fs / kAirGrid;
    gain[static_cast<std::size_t>(q)] = std::pow(10.0, -air_attenuation_db(p, f, distance) / 20.0);
  }
  std::vector<double> taps(2 * kAirKernelHalf + 1);
  for (int t = -kAirKernelHalf; t <= kAirKernelHalf; ++t) {
    double acc = 0.0;
    for (int q = 0; q < kAirGrid; ++q) {
      acc += gain[static_cast<std::size_t>(q)] *
             std::cos(2.0 * std::numbers::pi * q * t / static_cast<double>(kAirGrid));
    }
    taps[static_cast<std::size_t>(t + kAirKernelHalf)] = acc / kAirGrid;
  }
  return taps;
}

// Every arrival at sample m travelled c m / fs metres, so spreading each
// input sample with the kernel for that distance filters each arrival by its
// own path length. Kernels are shared across 32-sample blocks.
inline std::vector<double> apply_air(std::span<const double> x, const DegradationParams& p,
                                     double c, double fs) {
  std::vector<double> y(x.size(), 0.0);
  if (p.air_db_per_10khz_per_34m == 0.0) return {x.begin(), x.end()};
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> kernel;
  for (std::size_t block = 0; block * kAirBlock < x.size(); ++block) {
    const double centre = (static_cast<double>(block * kAirBlock) + 0.5 * kAirBlock) / fs;
    kernel = air_kernel(p, c * centre, fs);
    const std::size_t end = std::min(x.size(), (block + 1) * kAirBlock);
    for (std::size_t m = block * kAirBlock; m < end; ++m) {
      if (x[m] == 0.0) continue;
      const auto mm = static_cast<std::ptrdiff_t>(m);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, mm - kAirKernelHalf);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, mm + kAirKernelHalf);
      for (std::ptrdiff_t i = lo; i <= hi; ++i) {
        y[static_cast<std::size_t>(i)] +=
            x[m] * kernel[static_cast<std::size_t>(i - mm + kAirKernelHalf)];
      }
    }
  }
  return y;
}

}  // namespace detail

/// Proxy "measured" response: the image engine with a wall high-pass applied
/// once per reflection (order k sees it k times), air absorption by path
/// length, and the absorptivity offset. Disabled params give simulate().
inline ImpulseResponse simulate_degraded(const RoomModel& room, const Point3& source,
                                         const Point3& receiver, const DegradationParams& p) {
  p.validate();
  if (!p.enabled) return simulate(room, source, receiver);
  check_pair(room, source, receiver);
  const RoomModel plant = offset_absorption(room, p.abar_offset);
  const double fs = plant.sample_rate();
  const double c = plant.speed_of_sound();
  const std::size_t n = plant.ir_length();
  const detail::WallHighpass wall(p.wall_highpass_hz, fs);

  // acc <- H(acc) + x_k for k descending gives sum_k H^k x_k.
  std::vector<double> acc(n, 0.0);
  std::vector<double> shell(n, 0.0);
  std::vector<std::size_t> touched;
  bool acc_live = false;
  for_each_image_by_order(
      plant, source, receiver, simulation_horizon(plant, DelayMode::kNearestSample), true,
      [&](const ImageArrival& a) {
        const auto idx = static_cast<std::size_t>(std::llround(a.distance / c * fs));
        if (idx < n) {
          shell[idx] += a.amplitude;
          touched.push_back(idx);
        }
      },
      [&](int) {
        if (acc_live && p.wall_highpass_hz > 0.0) wall.run(acc);
        for (std::size_t idx : touched) {
          acc[idx] += shell[idx];
          shell[idx] = 0.0;
        }
        acc_live = acc_live || !touched.empty();
        touched.clear();
      });
  return ImpulseResponse(detail::apply_air(acc, p, c, fs), fs);
}

inline TransferMatrix simulate_degraded_matrix(const RoomModel& room,
                                               std::span<const Point3> sources,
                                               std::span<const Point3> receivers,
                                               const DegradationParams& p) {
  validate_geometry(room, sources);
  validate_geometry(room, receivers);
  std::vector<ImpulseResponse> entries;
  for (const Point3& rcv : receivers) {
    for (const Point3& src : sources) entries.push_back(simulate_degraded(room, src, rcv, p));
  }
  return TransferMatrix(receivers.size(), sources.size(), std::move(entries));
}

}  // namespace ririnv
