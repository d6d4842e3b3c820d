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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ririnv {

enum class ErrorKind {
  kInvalidArgument,
  kPointOutsideRoom,
  kCoincidentSourceReceiver,
  kOrderTooLarge,
  kNonpositiveTau,
  kBetaNegative,
  kSingularBin,
  kDimensionMismatch,
  kRateMismatch,
  kZeroRmsInterval,
  kEmptyIntegrationRegion,
  kZeroEnergy,
  kInsufficientDecay,
  kOutOfRange,
  kConfig,
  kIo,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kPointOutsideRoom: return "PointOutsideRoom";
    case ErrorKind::kCoincidentSourceReceiver: return "CoincidentSourceReceiver";
    case ErrorKind::kOrderTooLarge: return "OrderTooLarge";
    case ErrorKind::kNonpositiveTau: return "NonpositiveTau";
    case ErrorKind::kBetaNegative: return "BetaNegative";
    case ErrorKind::kSingularBin: return "SingularBin";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kRateMismatch: return "RateMismatch";
    case ErrorKind::kZeroRmsInterval: return "ZeroRmsInterval";
    case ErrorKind::kEmptyIntegrationRegion: return "EmptyIntegrationRegion";
    case ErrorKind::kZeroEnergy: return "ZeroEnergy";
    case ErrorKind::kInsufficientDecay: return "InsufficientDecay";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kConfig: return "Config";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable and is what the
/// CLI maps onto exit codes; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by validate_geometry; carries the offending point and axis (0=x).
class PointOutsideRoom : public Error {
 public:
  PointOutsideRoom(std::size_t index, int axis)
      : Error(ErrorKind::kPointOutsideRoom,
              "point " + std::to_string(index) + " lies outside the room on axis " +
                  std::string(1, "xyz"[axis])),
        index_(index),
        axis_(axis) {}

  std::size_t index() const noexcept { return index_; }
  int axis() const noexcept { return axis_; }

 private:
  std::size_t index_;
  int axis_;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool operator==(const Point3&) const = default;
};

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Wall order used for per-wall reflectivity.
enum Wall : int { kMinusX = 0, kPlusX, kMinusY, kPlusY, kMinusZ, kPlusZ };

/// Speed of sound used when a scenario does not override it (m/s).
inline constexpr double kDefaultSpeedOfSound = 346.58;
inline constexpr double kDefaultSampleRate = 44100.0;
inline constexpr std::size_t kDefaultIrLength = 65536;

/// Shoebox room with its origin at the center. Immutable once built.
class RoomModel {
 public:
  RoomModel(std::array<double, 3> dims, std::array<double, 6> wall_reflection,
            double speed_of_sound = kDefaultSpeedOfSound,
            double sample_rate = kDefaultSampleRate,
            std::size_t ir_length = kDefaultIrLength)
      : dims_(dims),
        reflection_(wall_reflection),
        speed_of_sound_(speed_of_sound),
        sample_rate_(sample_rate),
        ir_length_(ir_length) {
    for (double d : dims_) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw Error(ErrorKind::kInvalidArgument, "room dimensions must be positive");
      }
    }
    for (double r : reflection_) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, "reflection coefficient must lie in [0, 1]");
      }
    }
    if (!(speed_of_sound_ > 0.0) || !std::isfinite(speed_of_sound_)) {
      throw Error(ErrorKind::kInvalidArgument, "speed of sound must be positive");
    }
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
      throw Error(ErrorKind::kInvalidArgument, "sample rate must be positive");
    }
    if (ir_length_ == 0) {
      throw Error(ErrorKind::kInvalidArgument, "impulse response length must be positive");
    }
  }

  RoomModel(std::array<double, 3> dims, double reflection,
            double speed_of_sound = kDefaultSpeedOfSound,
            double sample_rate = kDefaultSampleRate,
            std::size_t ir_length = kDefaultIrLength)
      : RoomModel(dims, uniform(reflection), speed_of_sound, sample_rate, ir_length) {}

  /// Builds the room from an average Sabine absorptivity, r = sqrt(1 - abar).
  static RoomModel from_absorptivity(std::array<double, 3> dims, double abar,
                                     double speed_of_sound = kDefaultSpeedOfSound,
                                     double sample_rate = kDefaultSampleRate,
                                     std::size_t ir_length = kDefaultIrLength) {
    if (!(abar >= 0.0 && abar <= 1.0)) {
      throw Error(ErrorKind::kOutOfRange, "absorptivity must lie in [0, 1]");
    }
    return RoomModel(dims, std::sqrt(1.0 - abar), speed_of_sound, sample_rate, ir_length);
  }

  const std::array<double, 3>& dims() const noexcept { return dims_; }
  double dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
  const std::array<double, 6>& wall_reflection() const noexcept { return reflection_; }
  double wall_reflection(Wall w) const { return reflection_[static_cast<std::size_t>(w)]; }
  double speed_of_sound() const noexcept { return speed_of_sound_; }
  double sample_rate() const noexcept { return sample_rate_; }
  std::size_t ir_length() const noexcept { return ir_length_; }

  bool has_uniform_reflection() const {
    for (double r : reflection_) {
      if (r != reflection_[0]) return false;
    }
    return true;
  }

  /// Uniform reflectivity; for per-wall rooms the RMS over the six walls.
  double reflection() const {
    if (has_uniform_reflection()) return reflection_[0];
    return std::sqrt(1.0 - mean_absorptivity());
  }

  /// abar = 1 - r^2, averaged over walls when they differ.
  double mean_absorptivity() const {
    double acc = 0.0;
    for (double r : reflection_) acc += 1.0 - r * r;
    return acc / 6.0;
  }

  double volume() const { return dims_[0] * dims_[1] * dims_[2]; }
  double surface_area() const {
    return 2.0 * (dims_[0] * dims_[1] + dims_[1] * dims_[2] + dims_[0] * dims_[2]);
  }

  /// Strictly inside the walls.
  bool contains(const Point3& p) const {
    for (int a = 0; a < 3; ++a) {
      if (!(std::abs(p[a]) < 0.5 * dim(a))) return false;
    }
    return true;
  }

  RoomModel with_reflection(double r) const {
    return RoomModel(dims_, r, speed_of_sound_, sample_rate_, ir_length_);
  }
  RoomModel with_ir_length(std::size_t n) const {
    return RoomModel(dims_, reflection_, speed_of_sound_, sample_rate_, n);
  }

 private:
  static std::array<double, 6> uniform(double r) { return {r, r, r, r, r, r}; }

  std::array<double, 3> dims_;
  std::array<double, 6> reflection_;
  double speed_of_sound_;
  double sample_rate_;
  std::size_t ir_length_;
};

/// Throws PointOutsideRoom for the first point that is not strictly inside.
inline void validate_geometry(const RoomModel& room, std::span<const Point3> pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!is_finite(pts[i])) {
      throw Error(ErrorKind::kInvalidArgument, "point " + std::to_string(i) + " is not finite");
    }
    for (int a = 0; a < 3; ++a) {
      if (!(std::abs(pts[i][a]) < 0.5 * room.dim(a))) throw PointOutsideRoom(i, a);
    }
  }
}

/// Uniformly sampled, finite, real signal. The sample rate travels with the
/// samples so mismatched rates are caught where signals meet.
class ImpulseResponse {
 public:
  ImpulseResponse(std::vector<double> samples, double sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (samples_.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "impulse response must hold at least one sample");
    }
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
      throw Error(ErrorKind::kInvalidArgument, "sample rate must be positive");
    }
    for (double v : samples_) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kInvalidArgument, "impulse response samples must be finite");
      }
    }
  }

  /// Unit impulse delayed by `delay` samples.
  static ImpulseResponse delta(double sample_rate, std::size_t length = 1,
                               std::size_t delay = 0) {
    std::vector<double> v(std::max(length, delay + 1), 0.0);
    v[delay] = 1.0;
    return ImpulseResponse(std::move(v), sample_rate);
  }

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& vector() const noexcept { return samples_; }
  double operator[](std::size_t n) const { return samples_[n]; }
  std::size_t size() const noexcept { return samples_.size(); }
  double sample_rate() const noexcept { return sample_rate_; }
  double duration() const { return static_cast<double>(samples_.size()) / sample_rate_; }

  double energy() const {
    double e = 0.0;
    for (double v : samples_) e += v * v;
    return e;
  }

  bool operator==(const ImpulseResponse&) const = default;

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

/// Grid of responses indexed (output row, input column). For a plant the rows
/// are receivers (control points j) and the columns sources (i); a filter grid
/// uses the transposed roles. Every entry shares length and sample rate.
class TransferMatrix {
 public:
  TransferMatrix(std::size_t rows, std::size_t cols, std::vector<ImpulseResponse> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ == 0 || cols_ == 0) {
      throw Error(ErrorKind::kDimensionMismatch, "transfer matrix needs at least one row and column");
    }
    if (entries_.size() != rows_ * cols_) {
      throw Error(ErrorKind::kDimensionMismatch, "entry count does not match rows x cols");
    }
    for (const auto& e : entries_) {
      if (e.sample_rate() != entries_.front().sample_rate()) {
        throw Error(ErrorKind::kRateMismatch, "transfer matrix entries disagree on sample rate");
      }
      if (e.size() != entries_.front().size()) {
        throw Error(ErrorKind::kDimensionMismatch, "transfer matrix entries disagree on length");
      }
    }
  }

  /// 1x1 matrix.
  explicit TransferMatrix(ImpulseResponse single)
      : TransferMatrix(1, 1, std::vector<ImpulseResponse>{std::move(single)}) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t receivers() const noexcept { return rows_; }
  std::size_t sources() const noexcept { return cols_; }

  const ImpulseResponse& at(std::size_t row, std::size_t col) const {
    if (row >= rows_ || col >= cols_) {
      throw Error(ErrorKind::kDimensionMismatch, "transfer matrix index out of range");
    }
    return entries_[row * cols_ + col];
  }

  std::size_t length() const { return entries_.front().size(); }
  double sample_rate() const { return entries_.front().sample_rate(); }
  const std::vector<ImpulseResponse>& entries() const noexcept { return entries_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<ImpulseResponse> entries_;
};

/// Parameters of the regularized inversion.
class InversionConfig {
 public:
  InversionConfig(double beta = 1e-2, double modeling_delay = 0.5,
                  std::size_t fft_length = 0,
                  std::optional<double> window_tau = std::nullopt)
      : beta_(beta), modeling_delay_(modeling_delay), fft_length_(fft_length),
        window_tau_(window_tau) {
    if (!(beta_ >= 0.0) || !std::isfinite(beta_)) {
      throw Error(ErrorKind::kBetaNegative, "beta must be non-negative");
    }
    if (!(modeling_delay_ >= 0.0) || !std::isfinite(modeling_delay_)) {
      throw Error(ErrorKind::kInvalidArgument, "modeling delay must be non-negative");
    }
    if (window_tau_ && !(*window_tau_ > 0.0)) {
      throw Error(ErrorKind::kNonpositiveTau, "window time constant must be positive");
    }
  }

  /// beta = 1e-2, D = 500 ms: the dereverberation experiments.
  static InversionConfig dereverberation() { return InversionConfig(1e-2, 0.5); }
  /// beta = 0.05, D = 750 ms: the self-inversion illustration.
  static InversionConfig self_inversion() { return InversionConfig(0.05, 0.75); }

  double beta() const noexcept { return beta_; }
  double modeling_delay() const noexcept { return modeling_delay_; }
  /// 0 selects the default (twice the next power of two of the model length).
  std::size_t fft_length() const noexcept { return fft_length_; }
  const std::optional<double>& window_tau() const noexcept { return window_tau_; }

  std::size_t delay_samples(double sample_rate) const {
    return static_cast<std::size_t>(std::llround(modeling_delay_ * sample_rate));
  }

  std::size_t resolved_fft_length(std::size_t model_length) const {
    if (fft_length_ != 0) return fft_length_;
    std::size_t n = 1;
    while (n < model_length) n <<= 1;
    return 2 * n;
  }

  InversionConfig with_beta(double beta) const {
    return InversionConfig(beta, modeling_delay_, fft_length_, window_tau_);
  }
  InversionConfig with_tau(std::optional<double> tau) const {
    return InversionConfig(beta_, modeling_delay_, fft_length_, tau);
  }
  InversionConfig with_delay(double delay) const {
    return InversionConfig(beta_, delay, fft_length_, window_tau_);
  }
  InversionConfig with_fft_length(std::size_t n) const {
    return InversionConfig(beta_, modeling_delay_, n, window_tau_);
  }

 private:
  double beta_;
  double modeling_delay_;
  std::size_t fft_length_;
  std::optional<double> window_tau_;
};

}  // namespace ririnv
