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
#include <numeric>

#include "ririnv/degradation.hpp"
#include "ririnv/evaluation.hpp"
#include "ririnv/fft.hpp"
#include "test_support.hpp"

using namespace ririnv;
using namespace ririnv::testing;
using Catch::Approx;

TEST_CASE("degradation disabled is bit-identical to simulate") {
  DegradationParams p;
  p.enabled = false;
  const auto room = cube(4096);
  CHECK(simulate_degraded(room, kPistol1, kMic1, p) == simulate(room, kPistol1, kMic1));
}

TEST_CASE("degradation parameters must be non-negative") {
  for (int field = 0; field < 3; ++field) {
    DegradationParams p;
    if (field == 0) p.wall_highpass_hz = -1.0;
    if (field == 1) p.air_db_per_10khz_per_34m = -1.0;
    if (field == 2) p.abar_offset = -0.01;
    try {
      p.validate();
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kConfig);
    }
  }
}

TEST_CASE("air attenuation scales with distance and frequency squared") {
  DegradationParams p;
  CHECK(air_attenuation_db(p, 10000.0, 34.3) == Approx(8.0));
  CHECK(air_attenuation_db(p, 5000.0, 34.3) == Approx(2.0));
  CHECK(air_attenuation_db(p, 10000.0, 68.6) == Approx(16.0));
  CHECK(air_attenuation_db(p, 10000.0, 1.0) < 0.5);
}

TEST_CASE("direct path is nearly unchanged below 10 kHz") {
  // r = 0 leaves only the direct arrival, which crosses no wall
  RoomModel room(kCube, 0.0, kDefaultSpeedOfSound, kDefaultSampleRate, 4096);
  const DegradationParams p;
  const auto clean = simulate(room, kPistol1, kMic1);
  const auto proxy = simulate_degraded(room, kPistol1, kMic1, p);
  RealFft fft(4096);
  const auto a = fft.forward(clean.samples());
  const auto b = fft.forward(proxy.samples());
  const double bin_hz = 44100.0 / 4096;
  for (std::size_t k = 1; k * bin_hz < 10000.0; ++k) {
    const double db = 20.0 * std::log10(std::abs(b[k]) / std::abs(a[k]));
    CHECK(std::abs(db) < 0.5);
  }
}

TEST_CASE("wall high-pass removes DC from reflected sound only") {
  DegradationParams p;
  p.air_db_per_10khz_per_34m = 0.0;
  const auto room = cube(8192);
  const auto proxy = simulate_degraded(room, kPistol1, kMic1, p);
  const auto clean = simulate(room, kPistol1, kMic1);
  const double dc_clean = std::accumulate(clean.samples().begin(), clean.samples().end(), 0.0);
  const double dc_proxy = std::accumulate(proxy.samples().begin(), proxy.samples().end(), 0.0);
  CHECK(dc_proxy < 0.2 * dc_clean);
  CHECK(proxy[126] == Approx(clean[126]).epsilon(1e-12));  // direct arrival untouched
}

TEST_CASE("proxy drifts away from the clean model as time goes on") {
  const auto room = cube(32768);
  const DegradationParams p;
  const auto clean = simulate(room, kPistol1, kMic1);
  const auto proxy = simulate_degraded(room, kPistol1, kMic1, p);
  const auto mse = local_mse(clean, proxy, static_cast<std::size_t>(0.02 * 44100));
  REQUIRE(mse.size() >= 30);
  auto mean = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t k = from; k < to; ++k) s += mse[k].error;
    return s / static_cast<double>(to - from);
  };
  const double early = mean(0, 5);
  const double middle = mean(5, 15);
  const double late = mean(15, 30);
  INFO("E_ms early " << early << " middle " << middle << " late " << late);
  CHECK(early < middle);
  CHECK(middle < late);
}

TEST_CASE("abar offset lowers every wall's energy reflectance") {
  const auto room = cube();
  const auto off = offset_absorption(room, 0.02);
  for (double r : off.wall_reflection()) CHECK(r * r == Approx(1.0 - 0.0407 - 0.02));
  CHECK(offset_absorption(room, 0.0).wall_reflection() == room.wall_reflection());
}

TEST_CASE("degraded matrix entries follow (receiver, source) order") {
  const auto room = cube(2048);
  std::vector<Point3> s{kPistol1, kPistol2}, r{kMic1, kMic2};
  const DegradationParams p;
  const auto m = simulate_degraded_matrix(room, s, r, p);
  CHECK(m.at(1, 0) == simulate_degraded(room, kPistol1, kMic2, p));
  CHECK(m.at(0, 1) == simulate_degraded(room, kPistol2, kMic1, p));
}
