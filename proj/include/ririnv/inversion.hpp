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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "ririnv/core.hpp"
#include "ririnv/fft.hpp"

namespace ririnv {

/// Causal approximate inverse of a plant: an L x M grid of FIR filters
/// (rows are loudspeakers, columns are control points).
struct InverseFilterSet {
  TransferMatrix filters;
  InversionConfig config;
  std::size_t fft_length = 0;
  std::size_t delay_samples = 0;
  /// Modeling delay after rounding to whole samples, in seconds.
  double applied_delay_seconds = 0.0;
  /// Energy in the last 5% of each filter over its total energy, row-major
  /// like `filters`. Pre-cursor energy that wrapped around lands there.
  std::vector<double> wraparound_energy_ratio;

  std::size_t loudspeakers() const { return filters.rows(); }
  std::size_t control_points() const { return filters.cols(); }
  double max_wraparound_ratio() const {
    double m = 0.0;
    for (double r : wraparound_energy_ratio) m = std::max(m, r);
    return m;
  }
};

/// Scales sample n by exp(-n / (fs tau)). An empty tau (or +inf) leaves the
/// response unchanged.
inline ImpulseResponse exp_window(const ImpulseResponse& g, std::optional<double> tau) {
  if (!tau || std::isinf(*tau)) return g;
  if (!(*tau > 0.0)) {
    throw Error(ErrorKind::kNonpositiveTau, "window time constant must be positive");
  }
  std::vector<double> out(g.samples().begin(), g.samples().end());
  const double rate = 1.0 / (g.sample_rate() * *tau);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] *= std::exp(-static_cast<double>(n) * rate);
  return ImpulseResponse(std::move(out), g.sample_rate());
}

inline TransferMatrix exp_window(const TransferMatrix& g, std::optional<double> tau) {
  std::vector<ImpulseResponse> entries;
  entries.reserve(g.entries().size());
  for (const auto& e : g.entries()) entries.push_back(exp_window(e, tau));
  return TransferMatrix(g.rows(), g.cols(), std::move(entries));
}

inline double wraparound_ratio(std::span<const double> h) {
  double total = 0.0;
  for (double v : h) total += v * v;
  if (total == 0.0) return 0.0;
  const std::size_t tail = std::max<std::size_t>(1, h.size() / 20);
  double end = 0.0;
  for (std::size_t n = h.size() - tail; n < h.size(); ++n) end += h[n] * h[n];
  return end / total;
}

namespace detail {

using cplx = std::complex<double>;

// Solves (G^H G + beta I) H = G^H for one frequency bin. `g` is M x L
// row-major, the result L x M row-major. Gaussian elimination with partial
// pivoting on the L x L normal matrix; returns false when a pivot vanishes.
inline bool solve_regularized_bin(std::span<const cplx> g, std::size_t m, std::size_t l,
                                  double beta, std::vector<cplx>& a, std::vector<cplx>& h) {
  a.assign(l * l, cplx{});
  h.assign(l * m, cplx{});
  double scale = 0.0;
  for (std::size_t p = 0; p < l; ++p) {
    for (std::size_t q = 0; q < l; ++q) {
      cplx acc{};
      for (std::size_t j = 0; j < m; ++j) acc += std::conj(g[j * l + p]) * g[j * l + q];
      a[p * l + q] = acc;
    }
    a[p * l + p] += beta;
    for (std::size_t j = 0; j < m; ++j) h[p * m + j] = std::conj(g[j * l + p]);
    scale = std::max(scale, std::abs(a[p * l + p]));
  }
  const double tiny = scale * 1e-14;
  for (std::size_t col = 0; col < l; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < l; ++r) {
      if (std::abs(a[r * l + col]) > std::abs(a[piv * l + col])) piv = r;
    }
    if (!(std::abs(a[piv * l + col]) > tiny)) return false;
    if (piv != col) {
      for (std::size_t q = 0; q < l; ++q) std::swap(a[col * l + q], a[piv * l + q]);
      for (std::size_t j = 0; j < m; ++j) std::swap(h[col * m + j], h[piv * m + j]);
    }
    const cplx inv = 1.0 / a[col * l + col];
    for (std::size_t r = 0; r < l; ++r) {
      if (r == col) continue;
      const cplx f = a[r * l + col] * inv;
      if (f == cplx{}) continue;
      for (std::size_t q = col; q < l; ++q) a[r * l + q] -= f * a[col * l + q];
      for (std::size_t j = 0; j < m; ++j) h[r * m + j] -= f * h[col * m + j];
    }
  }
  for (std::size_t p = 0; p < l; ++p) {
    const cplx inv = 1.0 / a[p * l + p];
    for (std::size_t j = 0; j < m; ++j) h[p * m + j] *= inv;
  }
  return true;
}

}  // namespace detail

/// Regularized multichannel inverse with modeling delay.
///
/// The model is optionally tapered by exp(-t/tau), zero-padded to the FFT
/// length and, at every bin, H = (G^H G + beta I)^-1 G^H is multiplied by
/// exp(-j w D). The inverse transform of each entry is read as a causal
/// filter on [0, fft_length); whatever non-causal energy survives the delay
/// wraps to the buffer end and is reported in `wraparound_energy_ratio`.
inline InverseFilterSet invert(const TransferMatrix& model, const InversionConfig& config) {
  const double fs = model.sample_rate();
  const std::size_t n_fft = config.resolved_fft_length(model.length());
  if (n_fft < model.length()) {
    throw Error(ErrorKind::kInvalidArgument, "FFT length is shorter than the model");
  }
  const std::size_t delay = config.delay_samples(fs);
  if (delay >= n_fft) {
    throw Error(ErrorKind::kInvalidArgument, "modeling delay does not fit in the FFT length");
  }
  const TransferMatrix windowed = exp_window(model, config.window_tau());
  const std::size_t m = model.rows();
  const std::size_t l = model.cols();

  RealFft fft(n_fft);
  const std::size_t bins = fft.bins();
  std::vector<std::vector<detail::cplx>> spectra;
  spectra.reserve(m * l);
  for (const auto& e : windowed.entries()) spectra.push_back(fft.forward(e.samples()));

  std::vector<std::vector<detail::cplx>> out(l * m, std::vector<detail::cplx>(bins));
  std::vector<detail::cplx> g(m * l);
  std::vector<detail::cplx> a;
  std::vector<detail::cplx> h;
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t e = 0; e < m * l; ++e) g[e] = spectra[e][k];
    if (!detail::solve_regularized_bin(g, m, l, config.beta(), a, h)) {
      throw Error(ErrorKind::kSingularBin,
                  "normal matrix is singular at bin " + std::to_string(k) + " with beta = 0");
    }
    // Phase ramp for the delay; k*D is reduced mod N so the angle stays exact.
    const auto turns = static_cast<double>((static_cast<unsigned long long>(k) * delay) % n_fft);
    const double angle = -2.0 * std::numbers::pi * turns / static_cast<double>(n_fft);
    const detail::cplx shift = std::polar(1.0, angle);
    for (std::size_t e = 0; e < l * m; ++e) out[e][k] = h[e] * shift;
  }
  // Bins 0 and N/2 of a real signal must be real; drop round-off.
  for (auto& s : out) {
    s.front().imag(0.0);
    if (n_fft % 2 == 0) s.back().imag(0.0);
  }

  std::vector<ImpulseResponse> filters;
  std::vector<double> ratios;
  filters.reserve(l * m);
  for (auto& s : out) {
    auto taps = fft.inverse(s);
    ratios.push_back(wraparound_ratio(taps));
    filters.emplace_back(std::move(taps), fs);
  }
  return InverseFilterSet{TransferMatrix(l, m, std::move(filters)),
                          config,
                          n_fft,
                          delay,
                          static_cast<double>(delay) / fs,
                          std::move(ratios)};
}

/// Drives `plant` through `filters`: output k is
/// sum_j sum_i plant(k, j) * filters(j, i) * input[i], by linear convolution.
/// Output length is plant + filter + input length - 2.
inline std::vector<ImpulseResponse> apply(const TransferMatrix& filters,
                                          const TransferMatrix& plant,
                                          std::span<const ImpulseResponse> input) {
  if (filters.rows() != plant.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "filter rows must match plant sources");
  }
  if (input.size() != filters.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "need one input signal per control point");
  }
  const double fs = plant.sample_rate();
  if (filters.sample_rate() != fs) {
    throw Error(ErrorKind::kRateMismatch, "filters and plant disagree on sample rate");
  }
  std::size_t in_len = 0;
  for (const auto& x : input) {
    if (x.sample_rate() != fs) throw Error(ErrorKind::kRateMismatch, "input sample rate differs");
    in_len = std::max(in_len, x.size());
  }
  const std::size_t drive_len = filters.length() + in_len - 1;
  const std::size_t out_len = plant.length() + drive_len - 1;

  std::vector<std::vector<double>> drive(filters.rows(), std::vector<double>(drive_len, 0.0));
  for (std::size_t j = 0; j < filters.rows(); ++j) {
    for (std::size_t i = 0; i < filters.cols(); ++i) {
      const auto part = convolve(filters.at(j, i).samples(), input[i].samples());
      for (std::size_t n = 0; n < part.size(); ++n) drive[j][n] += part[n];
    }
  }
  std::vector<ImpulseResponse> outputs;
  outputs.reserve(plant.rows());
  for (std::size_t k = 0; k < plant.rows(); ++k) {
    std::vector<double> y(out_len, 0.0);
    for (std::size_t j = 0; j < plant.cols(); ++j) {
      const auto part = convolve(plant.at(k, j).samples(), drive[j]);
      for (std::size_t n = 0; n < part.size(); ++n) y[n] += part[n];
    }
    outputs.emplace_back(std::move(y), fs);
  }
  return outputs;
}

inline std::vector<ImpulseResponse> apply(const InverseFilterSet& filters,
                                          const TransferMatrix& plant,
                                          std::span<const ImpulseResponse> input) {
  return apply(filters.filters, plant, input);
}

inline constexpr std::size_t kMaxOracleFilterLength = 512;

/// Least-squares FIR inverse in the time domain:
/// min_h || g * h - delta(n - delay) ||^2 via the normal equations of the
/// convolution matrix with a 1e-12 ridge. Independent of the FFT route.
inline ImpulseResponse time_domain_ls_inverse_oracle(const ImpulseResponse& g,
                                                     std::size_t filter_len,
                                                     std::size_t delay) {
  if (filter_len == 0 || filter_len > kMaxOracleFilterLength) {
    throw Error(ErrorKind::kInvalidArgument, "oracle filter length must lie in [1, 512]");
  }
  const std::size_t out_len = g.size() + filter_len - 1;
  if (delay >= out_len) throw Error(ErrorKind::kInvalidArgument, "delay beyond output length");
  const auto taps = g.samples();
  const auto n = static_cast<Eigen::Index>(filter_len);
  Eigen::MatrixXd normal(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      const auto lag = static_cast<std::size_t>(std::abs(p - q));
      double acc = 0.0;
      for (std::size_t t = 0; t + lag < taps.size(); ++t) acc += taps[t] * taps[t + lag];
      normal(p, q) = acc;
    }
    normal(p, p) += 1e-12;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const auto shift = static_cast<std::ptrdiff_t>(delay) - static_cast<std::ptrdiff_t>(p);
    if (shift >= 0 && static_cast<std::size_t>(shift) < taps.size()) {
      rhs(p) = taps[static_cast<std::size_t>(shift)];
    }
  }
  const Eigen::VectorXd h = normal.ldlt().solve(rhs);
  return ImpulseResponse(std::vector<double>(h.data(), h.data() + h.size()), g.sample_rate());
}

}  // namespace ririnv
