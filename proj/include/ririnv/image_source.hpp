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
#include <cstdlib>
#include <future>
#include <map>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "ririnv/core.hpp"

namespace ririnv {

/// Integer coordinates (l, m, n) of an image in the mirrored lattice;
/// (0, 0, 0) is the direct source.
struct LatticeIndex {
  int l = 0;
  int m = 0;
  int n = 0;

  int operator[](int axis) const { return axis == 0 ? l : (axis == 1 ? m : n); }
  int order() const { return std::abs(l) + std::abs(m) + std::abs(n); }
  auto operator<=>(const LatticeIndex&) const = default;
};

struct ImageSource {
  LatticeIndex indices;
  Point3 position;
  double amplitude = 0.0;
  double delay_seconds = 0.0;
};

enum class DelayMode {
  kNearestSample,  // arrival rounded to the closest sample
  kFractional,     // arrival spread with a Hann-windowed sinc
};

inline constexpr int kFractionalKernelTaps = 81;
inline constexpr int kFractionalKernelHalf = kFractionalKernelTaps / 2;

/// Image of `source` for lattice index `idx`:
/// (l Lx + (-1)^l Sx, m Ly + (-1)^m Sy, n Lz + (-1)^n Sz).
inline Point3 image_position(const RoomModel& room, const Point3& source, LatticeIndex idx) {
  auto coord = [&](int k, double len, double s) {
    return static_cast<double>(k) * len + ((k % 2 == 0) ? s : -s);
  };
  return {coord(idx.l, room.dim(0), source.x), coord(idx.m, room.dim(1), source.y),
          coord(idx.n, room.dim(2), source.z)};
}

/// Product of wall reflectivities met along the axis for index k. An odd
/// positive index touches the + wall one more time than the - wall.
inline double axis_reflection_gain(const RoomModel& room, int axis, int k) {
  const double r_minus = room.wall_reflection(static_cast<Wall>(2 * axis));
  const double r_plus = room.wall_reflection(static_cast<Wall>(2 * axis + 1));
  const int a = std::abs(k);
  const int far = (a + 1) / 2;
  const int near = a / 2;
  const int hits_plus = k >= 0 ? far : near;
  const int hits_minus = k >= 0 ? near : far;
  return std::pow(r_plus, hits_plus) * std::pow(r_minus, hits_minus);
}

/// Lattice half-width along an axis that covers every image closer than
/// `max_distance`.
inline int lattice_bound(double max_distance, double dim) {
  return static_cast<int>(std::ceil(max_distance / dim)) + 1;
}

struct ImageArrival {
  LatticeIndex indices;
  double distance = 0.0;
  double amplitude = 0.0;
};

namespace detail {

struct AxisTable {
  int bound = 0;
  std::vector<double> offset_sq;  // (I - R)^2 indexed by k + bound
  std::vector<double> gain;

  double sq(int k) const { return offset_sq[static_cast<std::size_t>(k + bound)]; }
  double g(int k) const { return gain[static_cast<std::size_t>(k + bound)]; }
  double min_sq(int a) const { return std::min(sq(a), sq(-a)); }
};

// I - R is evaluated as k L - (R - S) for even k and k L - (R + S) for odd
// k. Swapping source and receiver maps even k to -k and negates the offset
// exactly, which keeps simulate() bitwise reciprocal.
inline AxisTable make_axis_table(const RoomModel& room, int axis, const Point3& src,
                                 const Point3& rcv, int bound) {
  AxisTable t;
  t.bound = bound;
  const std::size_t size = static_cast<std::size_t>(2 * bound + 1);
  t.offset_sq.resize(size);
  t.gain.resize(size);
  const double len = room.dim(axis);
  const double diff = rcv[axis] - src[axis];
  const double sum = rcv[axis] + src[axis];
  for (int k = -bound; k <= bound; ++k) {
    const double off = static_cast<double>(k) * len - ((k % 2 == 0) ? diff : sum);
    t.offset_sq[static_cast<std::size_t>(k + bound)] = off * off;
    t.gain[static_cast<std::size_t>(k + bound)] = axis_reflection_gain(room, axis, k);
  }
  return t;
}

}  // namespace detail

/// Visits every image closer than `max_distance`, one reflection-order shell
/// at a time. Within a shell, magnitudes (|l|, |m|, |n|) are visited in
/// ascending lexicographic order and each group of sign variants is emitted
/// sorted by (distance, amplitude), so the sequence of emitted arrivals is
/// invariant under source/receiver exchange. `on_shell_end(order)` fires
/// after each shell.
template <class OnImage, class OnShellEnd>
void for_each_image_by_order(const RoomModel& room, const Point3& src, const Point3& rcv,
                             double max_distance, bool descending, OnImage&& on_image,
                             OnShellEnd&& on_shell_end) {
  const detail::AxisTable tx =
      detail::make_axis_table(room, 0, src, rcv, lattice_bound(max_distance, room.dim(0)));
  const detail::AxisTable ty =
      detail::make_axis_table(room, 1, src, rcv, lattice_bound(max_distance, room.dim(1)));
  const detail::AxisTable tz =
      detail::make_axis_table(room, 2, src, rcv, lattice_bound(max_distance, room.dim(2)));
  const double r2 = max_distance * max_distance;
  const int max_order = tx.bound + ty.bound + tz.bound;

  struct Candidate {
    double d2;
    double gain;
    LatticeIndex idx;
  };
  std::array<Candidate, 8> group;

  for (int step = 0; step <= max_order; ++step) {
    const int k = descending ? max_order - step : step;
    const int a_hi = std::min(k, tx.bound);
    for (int a = 0; a <= a_hi; ++a) {
      const double xs = tx.min_sq(a);
      if (xs > r2) continue;
      const int b_lo = std::max(0, k - a - tz.bound);
      const int b_hi = std::min(k - a, ty.bound);
      for (int b = b_lo; b <= b_hi; ++b) {
        const double ys = ty.min_sq(b);
        if (xs + ys > r2) continue;
        const int c = k - a - b;
        if (xs + ys + tz.min_sq(c) > r2) continue;

        std::size_t count = 0;
        for (int sl : {a, -a}) {
          for (int sm : {b, -b}) {
            for (int sn : {c, -c}) {
              const double d2 = tx.sq(sl) + ty.sq(sm) + tz.sq(sn);
              if (d2 <= r2) {
                group[count++] = {d2, tx.g(sl) * ty.g(sm) * tz.g(sn), {sl, sm, sn}};
              }
              if (c == 0) break;
            }
            if (b == 0) break;
          }
          if (a == 0) break;
        }
        std::sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(count),
                  [](const Candidate& p, const Candidate& q) {
                    return std::tie(p.d2, p.gain) < std::tie(q.d2, q.gain);
                  });
        for (std::size_t g = 0; g < count; ++g) {
          const double d = std::sqrt(group[g].d2);
          on_image(ImageArrival{group[g].idx, d, group[g].gain / d});
        }
      }
    }
    on_shell_end(k);
  }
}

/// Hann-windowed sinc tap for an arrival at fractional position `pos`.
inline double fractional_delay_tap(double offset) {
  if (std::abs(offset) >= kFractionalKernelHalf + 1.0) return 0.0;
  const double window =
      0.5 * (1.0 + std::cos(std::numbers::pi * offset / (kFractionalKernelHalf + 1.0)));
  if (offset == 0.0) return window;
  const double x = std::numbers::pi * offset;
  return window * std::sin(x) / x;
}

/// Deposits one arrival into `buf`.
inline void deposit_arrival(std::vector<double>& buf, double position, double amplitude,
                            DelayMode mode) {
  const auto n = static_cast<std::int64_t>(buf.size());
  const std::int64_t centre = std::llround(position);
  if (mode == DelayMode::kNearestSample) {
    if (centre < n) buf[static_cast<std::size_t>(centre)] += amplitude;
    return;
  }
  const std::int64_t lo = std::max<std::int64_t>(0, centre - kFractionalKernelHalf);
  const std::int64_t hi = std::min<std::int64_t>(n - 1, centre + kFractionalKernelHalf);
  for (std::int64_t i = lo; i <= hi; ++i) {
    buf[static_cast<std::size_t>(i)] +=
        amplitude * fractional_delay_tap(static_cast<double>(i) - position);
  }
}

/// Propagation distance that can still reach the simulated window.
inline double simulation_horizon(const RoomModel& room, DelayMode mode) {
  const double samples = static_cast<double>(room.ir_length()) +
                         (mode == DelayMode::kFractional ? kFractionalKernelHalf + 1.0 : 0.0);
  return room.speed_of_sound() * samples / room.sample_rate();
}

inline void check_pair(const RoomModel& room, const Point3& source, const Point3& receiver) {
  const std::array<Point3, 2> pts{source, receiver};
  validate_geometry(room, pts);
  if (source == receiver) {
    throw Error(ErrorKind::kCoincidentSourceReceiver, "source and receiver coincide");
  }
}

/// Room impulse response as a sum of delayed, scaled impulses
/// r^(|l|+|m|+|n|) / d_lmn at t = d_lmn / c. The lattice is large enough that
/// no image arriving inside the window is dropped.
inline ImpulseResponse simulate(const RoomModel& room, const Point3& source,
                                const Point3& receiver,
                                DelayMode mode = DelayMode::kNearestSample) {
  check_pair(room, source, receiver);
  const double fs = room.sample_rate();
  const double c = room.speed_of_sound();
  std::vector<double> buf(room.ir_length(), 0.0);
  for_each_image_by_order(
      room, source, receiver, simulation_horizon(room, mode), false,
      [&](const ImageArrival& a) { deposit_arrival(buf, a.distance / c * fs, a.amplitude, mode); },
      [](int) {});
  return ImpulseResponse(std::move(buf), fs);
}

/// Entry (j, i) is the response from sources[i] to receivers[j].
inline TransferMatrix simulate_matrix(const RoomModel& room, std::span<const Point3> sources,
                                      std::span<const Point3> receivers,
                                      DelayMode mode = DelayMode::kNearestSample) {
  if (sources.empty() || receivers.empty()) {
    throw Error(ErrorKind::kDimensionMismatch, "need at least one source and one receiver");
  }
  validate_geometry(room, sources);
  validate_geometry(room, receivers);
  std::vector<std::future<ImpulseResponse>> pending;
  pending.reserve(sources.size() * receivers.size());
  for (const Point3& rcv : receivers) {
    for (const Point3& src : sources) {
      pending.push_back(std::async(std::launch::async, [&room, src, rcv, mode] {
        return simulate(room, src, rcv, mode);
      }));
    }
  }
  std::vector<ImpulseResponse> entries;
  entries.reserve(pending.size());
  for (auto& f : pending) entries.push_back(f.get());
  return TransferMatrix(receivers.size(), sources.size(), std::move(entries));
}

inline constexpr int kMaxOracleOrder = 4;

/// Closed-form enumeration of every lattice image with |l|+|m|+|n| <= max_order.
inline std::vector<ImageSource> enumerate_lattice(const RoomModel& room, const Point3& source,
                                                  const Point3& receiver, int max_order) {
  check_pair(room, source, receiver);
  std::vector<ImageSource> out;
  const double c = room.speed_of_sound();
  for (int l = -max_order; l <= max_order; ++l) {
    for (int m = -max_order; m <= max_order; ++m) {
      for (int n = -max_order; n <= max_order; ++n) {
        const LatticeIndex idx{l, m, n};
        if (idx.order() > max_order) continue;
        const Point3 pos = image_position(room, source, idx);
        const double d = distance(pos, receiver);
        const double gain = axis_reflection_gain(room, 0, l) * axis_reflection_gain(room, 1, m) *
                            axis_reflection_gain(room, 2, n);
        out.push_back({idx, pos, gain / d, d / c});
      }
    }
  }
  return out;
}

/// Test oracle: builds images by repeatedly mirroring across the six wall
/// planes, breadth first, keeping the first (lowest-order) copy of each
/// position. Independent of the lattice formula.
inline std::vector<ImageSource> simulate_oracle(const RoomModel& room, const Point3& source,
                                                const Point3& receiver, int max_order) {
  if (max_order > kMaxOracleOrder) {
    throw Error(ErrorKind::kOrderTooLarge, "oracle order is limited to 4");
  }
  if (max_order < 0) throw Error(ErrorKind::kInvalidArgument, "order must be non-negative");
  check_pair(room, source, receiver);

  struct Node {
    Point3 pos;
    LatticeIndex idx;
    double gain;
  };
  auto key = [](const Point3& p) {
    return std::array<long long, 3>{std::llround(p.x * 1e9), std::llround(p.y * 1e9),
                                    std::llround(p.z * 1e9)};
  };
  std::map<std::array<long long, 3>, bool> seen;
  std::vector<Node> all{{source, {0, 0, 0}, 1.0}};
  seen[key(source)] = true;
  std::vector<Node> frontier = all;
  for (int depth = 1; depth <= max_order; ++depth) {
    std::vector<Node> next;
    for (const Node& node : frontier) {
      for (int wall = 0; wall < 6; ++wall) {
        const int axis = wall / 2;
        const double plane = (wall % 2 == 0 ? -0.5 : 0.5) * room.dim(axis);
        Node child = node;
        double coords[3] = {node.pos.x, node.pos.y, node.pos.z};
        coords[axis] = 2.0 * plane - coords[axis];
        child.pos = {coords[0], coords[1], coords[2]};
        int ks[3] = {node.idx.l, node.idx.m, node.idx.n};
        ks[axis] = (wall % 2 == 0 ? -1 : 1) - ks[axis];
        child.idx = {ks[0], ks[1], ks[2]};
        child.gain = node.gain * room.wall_reflection(static_cast<Wall>(wall));
        if (seen.emplace(key(child.pos), true).second) next.push_back(child);
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::vector<ImageSource> out;
  out.reserve(all.size());
  const double c = room.speed_of_sound();
  for (const Node& node : all) {
    const double d = distance(node.pos, receiver);
    out.push_back({node.idx, node.pos, node.gain / d, d / c});
  }
  return out;
}

}  // namespace ririnv
