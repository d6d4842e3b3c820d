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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ririnv/evaluation.hpp"
#include "ririnv/image_source.hpp"
#include "test_support.hpp"

using namespace ririnv;
using namespace ririnv::testing;
using Catch::Approx;

namespace {

ImpulseResponse decaying(double fs, double tau_d, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(-static_cast<double>(i) / (tau_d * fs));
  return ImpulseResponse(std::move(v), fs);
}

EvalConfig cfg_with_delay(double d) {
  EvalConfig c;
  c.modeling_delay = d;
  return c;
}

}  // namespace

TEST_CASE("local_mse: identical and scaled signals give zero") {
  std::mt19937_64 rng(2);
  const ImpulseResponse a(random_signal(rng, 1000), 1000.0);
  std::vector<double> twice(a.samples().begin(), a.samples().end());
  for (auto& v : twice) v *= 2.0;
  for (const auto& p : local_mse(a, a, 100)) CHECK(p.error == Approx(0.0).margin(1e-24));
  for (const auto& p : local_mse(ImpulseResponse(twice, 1000.0), a, 100)) {
    CHECK(p.error == Approx(0.0).margin(1e-24));
  }
  CHECK(local_mse(a, a, 300).size() == 3);  // partial interval dropped
  CHECK(local_mse(a, a, 100)[4].start == 400);
}

TEST_CASE("local_mse: independent white noise tends to 2") {
  std::mt19937_64 rng(4);
  const ImpulseResponse a(random_signal(rng, 200000), 1000.0);
  const ImpulseResponse b(random_signal(rng, 200000), 1000.0);
  const auto pts = local_mse(a, b, 100000);
  REQUIRE(pts.size() == 2);
  for (const auto& p : pts) CHECK(p.error == Approx(2.0).margin(0.02));
}

TEST_CASE("local_mse: silent interval and invalid input") {
  std::vector<double> v(200, 1.0);
  for (std::size_t i = 100; i < 200; ++i) v[i] = 0.0;
  const ImpulseResponse a(v, 1000.0), b(std::vector<double>(200, 1.0), 1000.0);
  try {
    (void)local_mse(a, b, 100);
    FAIL("expected ZeroRmsInterval");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kZeroRmsInterval);
  }
  CHECK_THROWS_AS(local_mse(a, b, 1), Error);
  CHECK_THROWS_AS(local_mse(a, ImpulseResponse({1.0}, 1000.0), 2), Error);
}

TEST_CASE("dereverberation_ratio: a perfect delta is flagged infinite") {
  const auto g = decaying(1000.0, 0.05, 400);
  const auto x = ImpulseResponse::delta(1000.0, 800, 500);
  const auto dr = dereverberation_ratio(g, x, cfg_with_delay(0.5), std::nullopt);
  CHECK(dr.infinite);
  CHECK(std::isinf(dr.value));
}

TEST_CASE("dereverberation_ratio: x_hat = g with D = 0 gives 0 dB") {
  std::mt19937_64 rng(8);
  const ImpulseResponse g(random_signal(rng, 5000), 44100.0);
  const auto dr = dereverberation_ratio(g, g, cfg_with_delay(0.0), std::nullopt);
  CHECK_FALSE(dr.infinite);
  CHECK(dr.value == Approx(0.0).margin(1e-12));
  const auto early = dereverberation_ratio(g, g, cfg_with_delay(0.0), 0.05);
  CHECK(early.value == Approx(0.0).margin(1e-12));
}

TEST_CASE("dereverberation_ratio: scaling properties") {
  std::mt19937_64 rng(10);
  const ImpulseResponse g(random_signal(rng, 3000), 8000.0);
  const ImpulseResponse x(random_signal(rng, 6000), 8000.0);
  const auto cfg = cfg_with_delay(0.3);
  const double base = dereverberation_ratio(g, x, cfg, std::nullopt).value;
  auto scaled = [](const ImpulseResponse& s, double a) {
    std::vector<double> v(s.samples().begin(), s.samples().end());
    for (auto& e : v) e *= a;
    return ImpulseResponse(std::move(v), s.sample_rate());
  };
  CHECK(dereverberation_ratio(scaled(g, 3.0), scaled(x, 3.0), cfg, std::nullopt).value ==
        Approx(base).margin(1e-9));
  CHECK(dereverberation_ratio(g, scaled(x, 10.0), cfg, std::nullopt).value ==
        Approx(base - 20.0).margin(1e-9));
}

TEST_CASE("dereverberation_ratio: integration regions use strict inequalities") {
  // fs 1000, t_min 2.5 ms rounds to 3 samples: |n - D| must be 4 or more
  EvalConfig c;
  c.t_min = 0.0025;
  c.modeling_delay = 0.010;
  std::vector<double> xv(40, 0.0);
  xv[10] = 1.0;
  xv[13] = 5.0;  // inside the excluded window
  xv[14] = 1.0;  // first counted sample
  std::vector<double> gv(40, 0.0);
  gv[3] = 7.0;   // excluded from the reference
  gv[4] = 2.0;
  const auto dr = dereverberation_ratio(ImpulseResponse(gv, 1000.0), ImpulseResponse(xv, 1000.0), c,
                                        std::nullopt);
  CHECK(dr.value == Approx(10 * std::log10(4.0)));
  CHECK(residual_energy(ImpulseResponse(xv, 1000.0), 0.0025, 0.010, std::nullopt) ==
        Approx(1.0 / 1000.0));
}

TEST_CASE("dereverberation_ratio: empty reference region is an error") {
  const auto g = ImpulseResponse::delta(1000.0, 10, 0);
  try {
    (void)dereverberation_ratio(g, g, cfg_with_delay(0.0), std::nullopt);
    FAIL("expected EmptyIntegrationRegion");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyIntegrationRegion);
  }
}

TEST_CASE("EvalConfig needs 0 < t_min < early window") {
  EvalConfig c;
  c.t_min = 0.2;
  CHECK_THROWS_AS(c.validate(), Error);
  c.t_min = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("schroeder_curve: delta and closed-form exponential") {
  const auto d = schroeder_curve(ImpulseResponse::delta(1000.0, 5));
  CHECK(d[0] == 0.0);
  for (std::size_t n = 1; n < 5; ++n) CHECK(std::isinf(d[n]));

  const double fs = 8000.0, tau_d = 0.05;
  const auto g = decaying(fs, tau_d, 16000);  // 2 s, far past -60 dB
  const auto c = schroeder_curve(g);
  const double slope = 20.0 / (tau_d * fs * std::log(10.0));
  CHECK(c[100] - c[200] == Approx(100 * slope).epsilon(1e-6));
  CHECK(reverberation_time(g) == Approx(6.9078 * tau_d).epsilon(0.01));
  CHECK_THROWS_AS(schroeder_curve(ImpulseResponse({0.0, 0.0}, 1.0)), Error);
}

TEST_CASE("schroeder_curve is non-increasing and starts at 0 dB") {
  std::mt19937_64 rng(12);
  const ImpulseResponse g(random_signal(rng, 4000), 1000.0);
  const auto c = schroeder_curve(g);
  CHECK(c[0] == 0.0);
  for (std::size_t n = 1; n < c.size(); ++n) CHECK(c[n] <= c[n - 1]);
}

TEST_CASE("reverberation_time: curve that never reaches -35 dB") {
  const auto g = decaying(1000.0, 1.0, 500);
  try {
    (void)reverberation_time(g);
    FAIL("expected InsufficientDecay");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInsufficientDecay);
  }
}

TEST_CASE("remainder time: x_hat = g matches the Schroeder crossing") {
  const auto g = decaying(1000.0, 0.1, 3000);
  const auto c = schroeder_curve(g);
  const auto t10 = remainder_reverberation_time(g, g, 10.0);
  std::size_t cross = 0;
  while (c[cross] > -10.0) ++cross;
  CHECK(t10.reached);
  CHECK(t10.seconds == Approx(cross / 1000.0).margin(1.0 / 1000.0));
}

TEST_CASE("remainder time: silent tail after t0 returns t0") {
  std::vector<double> v(2000, 0.0);
  for (std::size_t i = 0; i < 300; ++i) v[i] = 1.0;
  const ImpulseResponse x(v, 1000.0);
  const auto t = remainder_reverberation_time(x, x, 200.0);
  CHECK(t.seconds == Approx(0.3));
}

TEST_CASE("remainder time: measured from an origin, ordered in L") {
  std::mt19937_64 rng(13);
  auto v = random_signal(rng, 5000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::exp(-static_cast<double>(i) / 400.0);
  const ImpulseResponse g(v, 1000.0);
  double prev = 0.0;
  for (double level : {10.0, 20.0, 30.0, 60.0}) {
    const auto t = remainder_reverberation_time(g, g, level);
    CHECK(t.seconds >= prev);
    prev = t.seconds;
  }
  std::vector<double> shifted(1000, 0.0);
  shifted.insert(shifted.end(), v.begin(), v.end());
  const auto a = remainder_reverberation_time(g, g, 20.0);
  const auto b = remainder_reverberation_time(g, ImpulseResponse(shifted, 1000.0), 20.0, 1000);
  CHECK(a.seconds == Approx(b.seconds));
  CHECK_THROWS_AS(remainder_reverberation_time(g, g, 0.0), Error);
  // a level beyond the output's reach is flagged
  const auto never = remainder_reverberation_time(ImpulseResponse({1e-9}, 1000.0), g, 10.0);
  CHECK_FALSE(never.reached);
}

TEST_CASE("sabine_absorptivity and reflection_from_absorptivity") {
  CHECK(sabine_absorptivity({1, 1, 1}, 0.161 / 6.0) == Approx(1.0));
  CHECK(sabine_absorptivity({1, 1, 1}, 0.161) == Approx(1.0 / 6.0));
  const double cube_abar = sabine_absorptivity(kCube, 1.32);
  CHECK(cube_abar == Approx(0.161 * 1.84 * 1.79 * 1.83 /
                             (2 * (1.84 * 1.79 + 1.79 * 1.83 + 1.84 * 1.83) * 1.32)));
  CHECK(cube_abar == Approx(0.037).margin(0.0005));
  // homothety: scaling dims by s multiplies the result by s
  CHECK(sabine_absorptivity({2.0 * 1.84, 2.0 * 1.79, 2.0 * 1.83}, 1.32) == Approx(2.0 * cube_abar));
  CHECK_THROWS_AS(sabine_absorptivity({1, 1, 1}, 0.0), Error);

  CHECK(reflection_from_absorptivity(0.0) == 1.0);
  CHECK(reflection_from_absorptivity(1.0) == 0.0);
  CHECK(reflection_from_absorptivity(0.0407) == Approx(0.97945).margin(1e-5));
  try {
    (void)reflection_from_absorptivity(1.2);
    FAIL("expected OutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOutOfRange);
  }
}

TEST_CASE("impulse_snr: peak against the mean of the rest") {
  std::vector<double> v(11, 0.01);
  v[5] = 1.0;
  CHECK(impulse_snr(ImpulseResponse(v, 1000.0), 5).value == Approx(40.0));
  CHECK(impulse_snr(ImpulseResponse::delta(1000.0, 8, 3), 3).infinite);
  CHECK_THROWS_AS(impulse_snr(ImpulseResponse::delta(1000.0, 8, 3), 8), Error);
}

TEST_CASE("evaluate_control_point on a perfect equalizer") {
  const auto g = decaying(1000.0, 0.05, 400);
  const auto x = ImpulseResponse::delta(1000.0, 900, 500);
  const auto row = evaluate_control_point(3, g, x, cfg_with_delay(0.5));
  CHECK(row.control_point == 3);
  CHECK(row.dr_total.infinite);
  CHECK(row.dr_early.infinite);
  CHECK(row.snr.infinite);
  CHECK(row.residual_energy_total == 0.0);
  for (const auto& t : row.dereverberated) CHECK(t.seconds <= 0.001);
  CHECK(row.measured[0].seconds < row.measured[1].seconds);
}
