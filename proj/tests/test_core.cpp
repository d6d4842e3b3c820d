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

#include "ririnv/core.hpp"
#include "test_support.hpp"

using namespace ririnv;
using namespace ririnv::testing;
using Catch::Approx;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_CASE("validate_geometry: center of a 2 m cube is inside") {
  RoomModel room({2, 2, 2}, 0.9);
  std::vector<Point3> pts{{0, 0, 0}};
  REQUIRE_NOTHROW(validate_geometry(room, pts));
}

TEST_CASE("validate_geometry: loudspeaker position 1 is inside the plywood cube") {
  std::vector<Point3> pts{kPistol1, kPistol2, kMic1, kMic2};
  REQUIRE_NOTHROW(validate_geometry(cube(), pts));
}

TEST_CASE("validate_geometry: point past the wall reports index and axis") {
  RoomModel room({2, 2, 2}, 0.9);
  std::vector<Point3> pts{{0, 0, 0}, {1.5, 0, 0}};
  try {
    validate_geometry(room, pts);
    FAIL("expected PointOutsideRoom");
  } catch (const PointOutsideRoom& e) {
    CHECK(e.kind() == ErrorKind::kPointOutsideRoom);
    CHECK(e.index() == 1);
    CHECK(e.axis() == 0);
  }
  // on the wall is not strictly inside
  std::vector<Point3> edge{{0, 0, -1.0}};
  REQUIRE_THROWS_AS(validate_geometry(room, edge), PointOutsideRoom);
  std::vector<Point3> nan{{0, std::nan(""), 0}};
  CHECK(kind_of([&] { validate_geometry(room, nan); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("RoomModel rejects invariant violations") {
  CHECK(kind_of([] { RoomModel({0, 1, 1}, 0.5); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel({1, -1, 1}, 0.5); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel({1, 1, 1}, 1.01); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel({1, 1, 1}, -0.1); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel({1, 1, 1}, 0.5, 0.0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel({1, 1, 1}, 0.5, 343.0, -1.0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel({1, 1, 1}, 0.5, 343.0, 8000.0, 0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { RoomModel::from_absorptivity({1, 1, 1}, 1.5); }) == ErrorKind::kOutOfRange);
  REQUIRE_NOTHROW(RoomModel({1, 1, 1}, 0.0));
  REQUIRE_NOTHROW(RoomModel({1, 1, 1}, 1.0));
}

TEST_CASE("RoomModel stores r and derives abar") {
  const auto room = cube();
  CHECK(room.reflection() == Approx(std::sqrt(1.0 - 0.0407)).epsilon(1e-15));
  CHECK(room.mean_absorptivity() == Approx(0.0407).epsilon(1e-12));
  CHECK(room.speed_of_sound() == 346.58);
  CHECK(room.sample_rate() == 44100.0);
  CHECK(room.ir_length() == 65536);
  CHECK(room.volume() == Approx(1.84 * 1.79 * 1.83));
  CHECK(room.surface_area() == Approx(2 * (1.84 * 1.79 + 1.79 * 1.83 + 1.84 * 1.83)));
  CHECK(room.has_uniform_reflection());

  RoomModel walls({2, 2, 2}, {0.9, 0.8, 0.9, 0.9, 0.9, 0.9});
  CHECK_FALSE(walls.has_uniform_reflection());
  CHECK(walls.wall_reflection(kPlusX) == 0.8);
  const double abar = 1.0 - (5 * 0.81 + 0.64) / 6.0;
  CHECK(walls.mean_absorptivity() == Approx(abar));
}

TEST_CASE("ImpulseResponse invariants") {
  CHECK(kind_of([] { ImpulseResponse({}, 44100); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { ImpulseResponse({1.0}, 0.0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { ImpulseResponse({1.0, std::numeric_limits<double>::infinity()}, 1.0); }) ==
        ErrorKind::kInvalidArgument);
  const auto d = ImpulseResponse::delta(1000.0, 8, 3);
  REQUIRE(d.size() == 8);
  CHECK(d[3] == 1.0);
  CHECK(d.energy() == 1.0);
  CHECK(d.duration() == Approx(0.008));
  CHECK(ImpulseResponse::delta(1000.0, 1, 5).size() == 6);
}

TEST_CASE("TransferMatrix (receiver, source) indexing round-trips") {
  std::vector<ImpulseResponse> e;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 2; ++i) e.emplace_back(std::vector<double>{10.0 * j + i, 0.0}, 8000.0);
  }
  TransferMatrix m(3, 2, e);
  CHECK(m.receivers() == 3);
  CHECK(m.sources() == 2);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 2; ++i) CHECK(m.at(j, i)[0] == 10.0 * j + i);
  }
  CHECK(kind_of([&] { (void)m.at(3, 0); }) == ErrorKind::kDimensionMismatch);
}

TEST_CASE("TransferMatrix rejects mixed lengths, rates and bad shapes") {
  ImpulseResponse a({1.0, 0.0}, 8000.0), b({1.0}, 8000.0), c({1.0, 0.0}, 16000.0);
  CHECK_THROWS_AS(TransferMatrix(1, 2, {a, b}), Error);
  CHECK_THROWS_AS(TransferMatrix(1, 2, {a, c}), Error);
  CHECK_THROWS_AS(TransferMatrix(2, 2, {a, a}), Error);
  CHECK_THROWS_AS(TransferMatrix(0, 0, {}), Error);
}

TEST_CASE("InversionConfig defaults, presets and validation") {
  InversionConfig d;
  CHECK(d.beta() == 1e-2);
  CHECK(d.modeling_delay() == 0.5);
  CHECK_FALSE(d.window_tau().has_value());
  CHECK(InversionConfig::self_inversion().beta() == 0.05);
  CHECK(InversionConfig::self_inversion().modeling_delay() == 0.75);
  CHECK(d.delay_samples(44100) == 22050);
  CHECK(InversionConfig(0.0, 0.75).delay_samples(44100) == 33075);
  CHECK(d.resolved_fft_length(65536) == 131072);
  CHECK(d.resolved_fft_length(1000) == 2048);
  CHECK(d.with_fft_length(4096).resolved_fft_length(1000) == 4096);
  CHECK(kind_of([] { InversionConfig(-1e-3); }) == ErrorKind::kBetaNegative);
  CHECK(kind_of([] { InversionConfig(0.0, 0.5, 0, 0.0); }) == ErrorKind::kNonpositiveTau);
  CHECK(kind_of([] { InversionConfig(0.0, -0.5); }) == ErrorKind::kInvalidArgument);
  CHECK(d.with_tau(0.06).window_tau().value() == 0.06);
  CHECK(d.with_beta(0.3).beta() == 0.3);
  CHECK(d.with_delay(0.1).modeling_delay() == 0.1);
}
