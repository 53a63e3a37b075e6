// Copyright 2026 The Dopplertag Authors
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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dopplertag/errors.h"
#include "dopplertag/geometry.h"
#include "dopplertag/harness.h"
#include "dopplertag/scene_sim.h"
#include "dopplertag/spectrum.h"

namespace sim = dopplertag::sim;
namespace dg = dopplertag::geometry;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

sim::Scene OneReceiver(dg::PlanarPoint where) {
  sim::Scene s;
  s.camera_position = {0, 3};
  s.optical_axis = {0, -1};
  s.receivers = {{"rx", where}};
  return s;
}

sim::SweepPlacement PlacementA(const sim::Scene& s) {
  return sim::ResolveSweepPlan(s, {}).a;
}

sim::ChannelParams QuietFloat() {
  auto ch = sim::ChannelParams::Quiet();
  ch.quantization = sim::Quantization::kFloat;
  ch.clock_offset_ppm = 0.0;
  return ch;
}

}  // namespace

TEST_SUITE("scene_sim") {

TEST_CASE("noiseless sweep integrates back to the peak speed") {
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 42);
  const auto v = dg::IntegrateVelocity(tr.accel_readings, 0.0, tr.accel_dt);
  CHECK(std::abs(v.peak - 3.4) <= 1e-6);
  CHECK(tr.accel_readings.size() == 120);
  CHECK(tr.positions.size() == 52920);
  CHECK(*std::max_element(tr.velocities.begin(), tr.velocities.end()) <= 3.4);
}

TEST_CASE("positions are the integral of the velocity profile") {
  const double vp = 2.0, tm = 0.1;
  const auto tr = sim::SynthesizeSweep(vp, 0.5, 0.1, 0.0, 1, tm);
  // Numerical integration of the sampled velocity.
  double x = tr.positions.front();
  CHECK(x == Approx(-vp * tm / 4));
  double worst = 0.0;
  for (std::size_t i = 1; i < tr.positions.size(); ++i) {
    x += 0.5 * (tr.velocities[i - 1] + tr.velocities[i]) / tr.sample_rate;
    worst = std::max(worst, std::abs(x - tr.positions[i]));
  }
  CHECK(worst <= 1e-6);
  CHECK(tr.positions.back() == Approx(vp * tm / 4));
}

TEST_CASE("accelerometer error budget") {
  double sum = 0.0;
  for (int seed = 0; seed < 1000; ++seed) {
    const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, sim::kDefaultAccelNoiseRms, seed);
    const double e = dg::IntegrateVelocity(tr.accel_readings, 0.0, 0.01).peak - 3.4;
    sum += e * e;
  }
  const double rms = std::sqrt(sum / 1000);
  CHECK(rms >= 0.07);
  CHECK(rms <= 0.13);
}

TEST_CASE("sweep preconditions") {
  CHECK_THROWS_AS(sim::SynthesizeSweep(0.0, 1.0, 0.2, 0, 1), dopplertag::PreconditionError);
  CHECK_THROWS_AS(sim::SynthesizeSweep(3.4, 0.0, 0.2, 0, 1), dopplertag::PreconditionError);
  CHECK_THROWS_AS(sim::SynthesizeSweep(3.4, 0.1, 0.2, 0, 1, 0.2), dopplertag::PreconditionError);
}

TEST_CASE("stationary tone carries the clock offset") {
  const auto scene = OneReceiver({0, 0});
  const auto tr = sim::SynthesizeSweep(1.0, 0.2, 1.0, 0.0, 1);
  auto ch = QuietFloat();
  ch.clock_offset_ppm = 100.0;
  const auto rec = sim::RenderRecording(scene, "rx", tr, PlacementA(scene), {}, ch, 3);
  CHECK(rec.true_rate == Approx(44100 * 1.0001));
  // 0.1 s .. 0.9 s is inside the stationary lead-in.
  std::vector<double> seg(rec.samples.begin() + 4410, rec.samples.begin() + 39690);
  const auto w = dopplertag::HannWindow(seg.size());
  for (std::size_t i = 0; i < seg.size(); ++i) seg[i] *= w[i];
  dopplertag::RealFft fft(1 << 17);
  const auto spec = fft.Forward(seg);
  std::size_t best = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  const double peak = best * 44100.0 / (1 << 17);
  const double expected = 20000.0 / 1.0001;  // clock runs fast, tone reads low
  CHECK(std::abs(peak - expected) <= 44100.0 / seg.size());
}

TEST_CASE("broadside receiver sees near-zero shift at mid-sweep") {
  const auto scene = OneReceiver({0, 0});
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  const auto parts = sim::RenderComponents(scene, "rx", tr, PlacementA(scene), {}, QuietFloat(), 1);
  const double half_path = 3.4 * 0.2 / 4;
  const double max_cos = half_path / std::hypot(half_path, 3.0);
  const double bound = dg::DopplerFrequency(20000, 340, 3.4 * max_cos, 0) - 20000;
  double worst = 0.0;
  for (double f : parts.frequency) worst = std::max(worst, std::abs(f - 20000));
  CHECK(worst <= bound + 1e-9);
  const auto mid = static_cast<std::size_t>(std::lround((0.7 + 3.0 / 340) * 44100));
  CHECK(std::abs(parts.frequency[mid] - 20000) < 0.05);
}

TEST_CASE("receiver ahead on the sweep axis sees the full shift") {
  const auto scene = OneReceiver({5, 3});
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  const auto parts = sim::RenderComponents(scene, "rx", tr, PlacementA(scene), {}, QuietFloat(), 1);
  const double peak = *std::max_element(parts.frequency.begin(), parts.frequency.end());
  CHECK(std::abs(peak - dg::DopplerFrequency(20000, 340, 3.4, 0)) <= 0.5);
}

TEST_CASE("phase is continuous") {
  const auto scene = OneReceiver({1, 0});
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  const auto parts = sim::RenderComponents(scene, "rx", tr, PlacementA(scene), {}, QuietFloat(), 1);
  const double fmax = *std::max_element(parts.frequency.begin(), parts.frequency.end());
  const double limit = 2 * kPi * fmax / parts.true_rate;
  const double d_start = std::hypot(1 - (-3.4 * 0.2 / 4), 3.0);
  const auto start = static_cast<std::size_t>(std::ceil(d_start / 340 * parts.true_rate));
  double phase = 0.0, worst_jump = 0.0, worst_err = 0.0;
  const double amp_ref = 0.1 * 3.0;
  for (std::size_t i = start + 1; i < parts.tone.size(); ++i) {
    const double step = 2 * kPi * 0.5 * (parts.frequency[i - 1] + parts.frequency[i]) / parts.true_rate;
    worst_jump = std::max(worst_jump, step);
    phase += step;
    if (i < start + 20000) {  // stationary: amplitude fixed by distance
      worst_err = std::max(worst_err, std::abs(parts.tone[i] - amp_ref / d_start * std::sin(phase)));
    }
  }
  CHECK(worst_jump <= limit + 1e-12);
  CHECK(worst_err < 1e-6);
}

TEST_CASE("in-band SNR hits the target") {
  const auto scene = OneReceiver({0, 0});  // at the 3 m reference
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  for (auto kind : {sim::NoiseKind::kAmbient, sim::NoiseKind::kMusic, sim::NoiseKind::kConversation}) {
    for (double snr : {0.0, 10.0, 20.0}) {
      sim::ChannelParams ch;
      ch.noise = kind;
      ch.target_snr_db = snr;
      const auto parts = sim::RenderComponents(scene, "rx", tr, PlacementA(scene), {}, ch, 9);
      const double ps = dopplertag::BandPower(parts.tone, 44100, 19500, 20500);
      const double pn = dopplertag::BandPower(parts.noise, 44100, 19500, 20500);
      CAPTURE(sim::ToString(kind));
      CAPTURE(snr);
      CHECK(std::abs(10 * std::log10(ps / pn) - snr) <= 1.0);
    }
  }
}

TEST_CASE("doubling distance halves the amplitude") {
  sim::Scene s = OneReceiver({0, 0});
  s.receivers.push_back({"far", {0, -3}});
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  auto peak = [&](const std::string& name) {
    const auto rec = sim::RenderRecording(s, name, tr, PlacementA(s), {}, QuietFloat(), 1);
    double m = 0.0;
    for (std::size_t i = 2205; i < 8820; ++i) m = std::max(m, std::abs(rec.samples[i]));
    return m;
  };
  CHECK(peak("rx") / peak("far") == Approx(2.0).epsilon(2e-3));
}

TEST_CASE("recordings are quantized, bounded and sized") {
  const auto scene = OneReceiver({0, 0});
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  sim::ChannelParams ch;
  ch.noise = sim::NoiseKind::kConversation;
  ch.target_snr_db = -10.0;
  const auto rec = sim::RenderRecording(scene, "rx", tr, PlacementA(scene), {}, ch, 4);
  CHECK(std::abs(static_cast<double>(rec.samples.size()) - 1.2 * rec.nominal_rate) <= 1.0);
  for (double x : rec.samples) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
    CHECK(std::abs(x * 32767 - std::round(x * 32767)) < 1e-6);
  }
  CHECK(std::abs(rec.true_rate / rec.nominal_rate - 1.0) <= 30e-6);
}

TEST_CASE("render errors") {
  const auto tr = sim::SynthesizeSweep(3.4, 1.0, 0.2, 0.0, 1);
  // Receiver exactly where the speaker starts.
  const auto scene = OneReceiver({-3.4 * 0.2 / 4, 3});
  CHECK_THROWS_AS(sim::RenderRecording(scene, "rx", tr, PlacementA(scene), {}, QuietFloat(), 1),
                  dopplertag::ConfigError);
  const auto ok = OneReceiver({0, 0});
  CHECK_THROWS_AS(sim::RenderRecording(ok, "nobody", tr, PlacementA(ok), {}, QuietFloat(), 1),
                  dopplertag::ConfigError);
  sim::ToneSpec high;
  high.f0 = 22000;
  CHECK_THROWS_AS(sim::RenderRecording(ok, "rx", tr, PlacementA(ok), high, QuietFloat(), 1),
                  dopplertag::PreconditionError);
  auto ch = QuietFloat();
  ch.clock_offset_ppm = 250.0;
  CHECK_THROWS_AS(ch.Validate(), dopplertag::ConfigError);
}

TEST_CASE("scene validation") {
  sim::Scene s = OneReceiver({0, 0});
  s.bystanders.push_back({"rx", {3, 0}});
  CHECK_THROWS_AS(s.Validate(), dopplertag::ConfigError);
  s = OneReceiver({0, 0});
  s.receivers.clear();
  CHECK_THROWS_AS(s.Validate(), dopplertag::ConfigError);
  s = OneReceiver({0, 0});
  s.optical_axis = {0, -2};
  CHECK_THROWS_AS(s.Validate(), dopplertag::ConfigError);
  s = OneReceiver({0, 0});
  s.rows_ground_truth = std::vector<int>{0, 1};
  CHECK_THROWS_AS(s.Validate(), dopplertag::ConfigError);
}

TEST_CASE("one receiver, quiet channel") {
  const auto s = OneReceiver({0, 0});
  const auto session = sim::SimulateSession(s, {}, sim::ChannelParams::Quiet(), 0);
  REQUIRE(session.sweeps.size() == 1);
  CHECK(session.sweeps[0].recordings.size() == 1);
  REQUIRE(session.ground_truth.rows.size() == 1);
  CHECK(session.ground_truth.rows[0] == std::vector<std::string>{"rx"});
  CHECK(session.ground_truth.excluded.empty());
}

TEST_CASE("sessions are bit-identical per seed") {
  const auto scene = dopplertag::harness::SingleRowScene(6, 3.0);
  const sim::ChannelParams ch;  // ambient, 10 dB
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = sim::SimulateSession(scene, {}, ch, seed);
    const auto b = sim::SimulateSession(scene, {}, ch, seed);
    REQUIRE(a.sweeps[0].recordings.size() == 6);
    for (std::size_t r = 0; r < 6; ++r) {
      CHECK(a.sweeps[0].recordings[r].samples == b.sweeps[0].recordings[r].samples);
      CHECK(a.sweeps[0].recordings[r].true_rate == b.sweeps[0].recordings[r].true_rate);
    }
    CHECK(a.sweeps[0].trace.accel_readings == b.sweeps[0].trace.accel_readings);
  }
  const auto a = sim::SimulateSession(scene, {}, ch, 1);
  const auto b = sim::SimulateSession(scene, {}, ch, 2);
  CHECK(a.sweeps[0].recordings[0].samples != b.sweeps[0].recordings[0].samples);
}

TEST_CASE("three rows with two sweeps") {
  const auto f = dopplertag::harness::MultiRowScene(3, 2, 3.0, 1.0);
  const auto session = sim::SimulateSession(f.scene, f.plan, sim::ChannelParams::Quiet(), 5);
  REQUIRE(session.sweeps.size() == 2);
  CHECK(session.sweeps[0].recordings.size() + session.sweeps[1].recordings.size() == 12);
  CHECK(session.sweeps[1].placement.id == dopplertag::SweepId::kB);
  CHECK(session.sweeps[1].placement.position == dg::PlanarPoint{-1.0, 0.0});
  CHECK(session.sweeps[1].placement.facing == dg::PlanarPoint{1.0, 0.0});
  // Ground truth rows follow rows_ground_truth, front first, left to right.
  const auto& rows = session.ground_truth.rows;
  REQUIRE(rows.size() == 3);
  const auto& labels = *f.scene.rows_ground_truth;
  for (std::size_t r = 0; r < 3; ++r) {
    REQUIRE(rows[r].size() == 2);
    for (const auto& name : rows[r]) {
      for (std::size_t i = 0; i < f.scene.receivers.size(); ++i) {
        if (f.scene.receivers[i].name == name) CHECK(labels[i] == static_cast<int>(r));
      }
    }
    const auto& left = f.scene.Find(rows[r][0]).position;
    const auto& right = f.scene.Find(rows[r][1]).position;
    CHECK(left.x > right.x);  // camera-left is +x
  }
}

TEST_CASE("sweep plan must match the scene") {
  auto f = dopplertag::harness::MultiRowScene(2, 2, 3.0, 1.0);
  auto no_second = f.plan;
  no_second.second.reset();
  CHECK_THROWS_AS(sim::SimulateSession(f.scene, no_second, sim::ChannelParams::Quiet(), 0),
                  dopplertag::ConfigError);
  auto narrow = f.plan;
  narrow.second->distance_w = 0.2;  // receivers at x = -0.4 fall behind B
  CHECK_THROWS_AS(sim::SimulateSession(f.scene, narrow, sim::ChannelParams::Quiet(), 0),
                  dopplertag::ConfigError);
}

TEST_CASE("ground truth screens the field of view") {
  sim::Scene s = OneReceiver({0, 0});
  const double r = 3.0;
  auto at = [&](double deg) {
    const double a = dg::DegToRad(deg);
    return dg::PlanarPoint{r * std::sin(a), 3.0 - r * std::cos(a)};
  };
  s.receivers = {{"in", at(30)}};
  s.bystanders = {{"out", at(-40)}, {"behind", {0, 5}}};
  const auto truth = sim::GroundTruthLayout(s);
  CHECK(truth.rows == std::vector<std::vector<std::string>>{{"in"}});
  CHECK(truth.excluded.at("out") == dopplertag::ExclusionReason::kOutOfFov);
  CHECK(truth.excluded.at("behind") == dopplertag::ExclusionReason::kOutOfFov);
  CHECK(truth.angles.at("in") == Approx(dg::DegToRad(30)));
  CHECK(truth.angles.at("out") == Approx(dg::DegToRad(-40)));
}

TEST_CASE("DeriveSeed spreads inputs") {
  CHECK(sim::DeriveSeed(1, 2, 3) == sim::DeriveSeed(1, 2, 3));
  CHECK(sim::DeriveSeed(1, 2, 3) != sim::DeriveSeed(1, 3, 2));
  CHECK(sim::DeriveSeed(0, 0, 0) != sim::DeriveSeed(1, 0, 0));
}

}  // TEST_SUITE
