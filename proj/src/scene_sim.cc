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

#include "dopplertag/scene_sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "dopplertag/errors.h"
#include "dopplertag/spectrum.h"

namespace dopplertag::sim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double Dot(PlanarPoint a, PlanarPoint b) { return a.x * b.x + a.y * b.y; }
PlanarPoint Sub(PlanarPoint a, PlanarPoint b) { return {a.x - b.x, a.y - b.y}; }
PlanarPoint Add(PlanarPoint a, PlanarPoint b) { return {a.x + b.x, a.y + b.y}; }
PlanarPoint Scale(PlanarPoint a, double s) { return {a.x * s, a.y * s}; }
double Norm(PlanarPoint a) { return std::hypot(a.x, a.y); }
bool Finite(PlanarPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One-pole low-pass, y[n] = (1 - a) x[n] + a y[n-1].
void OnePole(std::vector<double>& x, double a) {
  double y = 0.0;
  for (double& v : x) {
    y = (1.0 - a) * v + a * y;
    v = y;
  }
}

void Normalize(std::vector<double>& x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  if (sum <= 0.0) return;
  const double k = 1.0 / std::sqrt(sum / static_cast<double>(x.size()));
  for (double& v : x) v *= k;
}

std::vector<double> RawNoise(NoiseKind kind, std::size_t n, double rate,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(n, 0.0);
  if (kind == NoiseKind::kNone) return out;
  for (double& v : out) v = gauss(rng);
  if (kind == NoiseKind::kAmbient) return out;

  // Music and conversation: strong low-frequency body, weak broadband floor.
  std::vector<double> body(n);
  for (double& v : body) v = gauss(rng);
  OnePole(body, kind == NoiseKind::kMusic ? 0.9 : 0.97);
  Normalize(body);
  if (kind == NoiseKind::kMusic) {
    std::uniform_real_distribution<double> freq(150.0, 4000.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    for (int h = 0; h < 6; ++h) {
      const double f = freq(rng);
      const double p = phase(rng);
      for (std::size_t i = 0; i < n; ++i) {
        body[i] += 0.5 * std::sin(kTwoPi * f * static_cast<double>(i) / rate + p);
      }
    }
  } else {
    // Syllable-rate amplitude modulation.
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    const double p = phase(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      body[i] *= 0.6 + 0.4 * std::sin(kTwoPi * 4.0 * t + p);
    }
  }
  Normalize(body);
  for (std::size_t i = 0; i < n; ++i) out[i] = 3.0 * body[i] + 0.3 * out[i];
  return out;
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a,
                         std::uint64_t b) {
  return SplitMix(SplitMix(SplitMix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

// ---- Scene ----

void Scene::Validate() const {
  if (receivers.empty()) throw ConfigError("scene.receivers: at least one receiver required");
  if (!Finite(camera_position)) throw ConfigError("scene.camera_position: not finite");
  const double axis_norm = Norm(optical_axis);
  if (!std::isfinite(axis_norm) || std::abs(axis_norm - 1.0) > 1e-6) {
    throw ConfigError("scene.optical_axis: must be a unit vector");
  }
  if (!(fov > 0.0 && fov < std::numbers::pi)) {
    throw ConfigError("scene.fov: must lie in (0, 180) degrees");
  }
  std::set<std::string> names;
  auto check = [&](const Person& p, const char* list) {
    if (p.name.empty()) throw ConfigError(std::string("scene.") + list + ": empty name");
    if (!names.insert(p.name).second) {
      throw ConfigError(std::string("scene.") + list + ": duplicate name '" + p.name + "'");
    }
    if (!Finite(p.position)) {
      throw ConfigError(std::string("scene.") + list + ": position of '" + p.name + "' not finite");
    }
  };
  for (const auto& p : receivers) check(p, "receivers");
  for (const auto& p : bystanders) check(p, "bystanders");
  if (rows_ground_truth) {
    if (rows_ground_truth->size() != receivers.size()) {
      throw ConfigError("scene.rows_ground_truth: needs one entry per receiver");
    }
    for (int r : *rows_ground_truth) {
      if (r < 0) throw ConfigError("scene.rows_ground_truth: negative row index");
    }
  }
}

std::vector<Person> Scene::Members() const {
  std::vector<Person> all = receivers;
  all.insert(all.end(), bystanders.begin(), bystanders.end());
  return all;
}

const Person& Scene::Find(const std::string& name) const {
  for (const auto& p : receivers) if (p.name == name) return p;
  for (const auto& p : bystanders) if (p.name == name) return p;
  throw ConfigError("no receiver named '" + name + "' in scene");
}

int Scene::RowCount() const {
  if (!rows_ground_truth) return 1;
  std::set<int> distinct(rows_ground_truth->begin(), rows_ground_truth->end());
  return static_cast<int>(distinct.size());
}

CameraView ViewFrom(PlanarPoint position, PlanarPoint axis, PlanarPoint point) {
  const PlanarPoint r = Sub(point, position);
  const PlanarPoint left = LeftOf(axis);
  CameraView v;
  v.depth = Dot(r, axis);
  v.lateral = -Dot(r, left);
  v.alpha = std::atan2(Dot(r, left), v.depth);
  return v;
}

SweepGeometry ResolveSweepPlan(const Scene& scene, const SweepPlan& plan) {
  scene.Validate();
  if (!(plan.v_peak_a > 0.0)) throw ConfigError("sweep_plan.v_peak: must be positive");
  SweepGeometry g;
  g.a = {SweepId::kA, scene.camera_position, scene.optical_axis, plan.v_peak_a};
  if (scene.RowCount() >= 2 && !plan.second) {
    throw ConfigError("sweep_plan: a second sweep is required for a multi-row scene");
  }
  if (!plan.second) return g;

  const SecondSweep& s = *plan.second;
  if (!(s.distance_l > 0.0) || !(s.distance_w > 0.0)) {
    throw ConfigError("sweep_plan.second: L and W must be positive");
  }
  if (!(s.v_peak > 0.0)) throw ConfigError("sweep_plan.second.v_peak: must be positive");
  g.distance_l = s.distance_l;
  g.distance_w = s.distance_w;
  g.group_center = Add(scene.camera_position, Scale(scene.optical_axis, s.distance_l));
  const PlanarPoint left = LeftOf(scene.optical_axis);
  SweepPlacement b;
  b.id = SweepId::kB;
  b.position = Sub(g.group_center, Scale(left, s.distance_w));
  b.facing = left;
  b.v_peak = s.v_peak;
  for (const auto& p : scene.Members()) {
    if (Dot(Sub(p.position, b.position), b.facing) <= 0.0) {
      std::ostringstream msg;
      msg << "sweep_plan.second: '" << p.name
          << "' is not in front of sweep position B (W = " << s.distance_w << " m)";
      throw ConfigError(msg.str());
    }
  }
  g.b = b;
  return g;
}

// ---- Sweep ----

double SweepTrace::MotionStart() const {
  return lead_in + 0.5 * (duration - motion_duration);
}

double SweepTrace::VelocityAt(double t) const {
  const double tau = t - MotionStart();
  if (tau <= 0.0 || tau >= motion_duration) return 0.0;
  return 0.5 * v_peak * (1.0 - std::cos(kTwoPi * tau / motion_duration));
}

double SweepTrace::PositionAt(double t) const {
  const double tau = std::clamp(t - MotionStart(), 0.0, motion_duration);
  const double tm = motion_duration;
  return 0.5 * v_peak * (tau - tm / kTwoPi * std::sin(kTwoPi * tau / tm)) -
         0.25 * v_peak * tm;
}

SweepTrace SynthesizeSweep(double v_peak, double duration, double lead_in,
                           double accel_noise_rms, std::uint64_t seed,
                           double motion_duration, double sample_rate) {
  if (!(v_peak > 0.0)) throw PreconditionError("synthesize_sweep: v_peak must be positive");
  if (!(duration > 0.0)) throw PreconditionError("synthesize_sweep: duration must be positive");
  if (!(lead_in >= 0.0)) throw PreconditionError("synthesize_sweep: negative lead-in");
  if (!(motion_duration > 0.0) || motion_duration > duration) {
    throw PreconditionError("synthesize_sweep: motion must fit inside the emission");
  }
  if (!(accel_noise_rms >= 0.0)) throw PreconditionError("synthesize_sweep: negative noise");
  if (!(sample_rate > 0.0)) throw PreconditionError("synthesize_sweep: bad sample rate");

  SweepTrace tr;
  tr.v_peak = v_peak;
  tr.duration = duration;
  tr.lead_in = lead_in;
  tr.motion_duration = motion_duration;
  tr.sample_rate = sample_rate;

  const auto n = static_cast<std::size_t>(std::llround(tr.Length() * sample_rate));
  tr.positions.resize(n);
  tr.velocities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    tr.positions[i] = tr.PositionAt(t);
    tr.velocities[i] = tr.VelocityAt(t);
  }

  std::mt19937_64 rng(DeriveSeed(seed, 0xacce1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto m = static_cast<std::size_t>(std::llround(tr.Length() / tr.accel_dt));
  tr.accel_readings.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t0 = static_cast<double>(j) * tr.accel_dt;
    const double t1 = static_cast<double>(j + 1) * tr.accel_dt;
    const double exact = (tr.VelocityAt(t1) - tr.VelocityAt(t0)) / tr.accel_dt;
    const double noise = gauss(rng);
    tr.accel_readings[j] = exact + (accel_noise_rms > 0.0 ? accel_noise_rms * noise : 0.0);
  }
  return tr;
}

// ---- Channel ----

std::string_view ToString(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone: return "none";
    case NoiseKind::kAmbient: return "ambient";
    case NoiseKind::kMusic: return "music";
    case NoiseKind::kConversation: return "conversation";
  }
  return "none";
}

NoiseKind NoiseKindFromString(std::string_view text) {
  if (text == "none" || text == "quiet") return NoiseKind::kNone;
  if (text == "ambient") return NoiseKind::kAmbient;
  if (text == "music") return NoiseKind::kMusic;
  if (text == "conversation") return NoiseKind::kConversation;
  throw ParseError("unknown noise kind '" + std::string(text) +
                   "' (expected none, ambient, music or conversation)");
}

ChannelParams ChannelParams::Quiet() {
  ChannelParams p;
  p.noise = NoiseKind::kNone;
  return p;
}

void ChannelParams::Validate() const {
  if (!std::isfinite(target_snr_db)) throw ConfigError("channel.snr_db: not finite");
  if (!(reference_distance > 0.0)) throw ConfigError("channel.reference_distance: must be positive");
  if (!(reference_amplitude > 0.0)) throw ConfigError("channel.reference_amplitude: must be positive");
  if (!(snr_band_low > 0.0 && snr_band_high > snr_band_low)) {
    throw ConfigError("channel: bad SNR band");
  }
  if (clock_offset_ppm && !(std::abs(*clock_offset_ppm) <= 200.0)) {
    throw ConfigError("channel.clock_offset_ppm: magnitude above 200");
  }
  if (!(max_clock_offset_ppm >= 0.0 && max_clock_offset_ppm <= 200.0)) {
    throw ConfigError("channel.max_clock_offset_ppm: must lie in [0, 200]");
  }
}

RenderedComponents RenderComponents(const Scene& scene,
                                    const std::string& receiver_name,
                                    const SweepTrace& sweep,
                                    const SweepPlacement& placement,
                                    const ToneSpec& tone,
                                    const ChannelParams& channel,
                                    std::uint64_t seed) {
  channel.Validate();
  const Person& rx = scene.Find(receiver_name);
  const double c = tone.sound_speed;

  std::mt19937_64 clock_rng(DeriveSeed(seed, 0xc10c));
  RenderedComponents out;
  if (channel.clock_offset_ppm) {
    out.clock_offset_ppm = *channel.clock_offset_ppm;
  } else {
    std::uniform_real_distribution<double> ppm(-channel.max_clock_offset_ppm,
                                               channel.max_clock_offset_ppm);
    out.clock_offset_ppm = ppm(clock_rng);
  }
  const double nominal = sweep.sample_rate;
  out.true_rate = nominal * (1.0 + out.clock_offset_ppm * 1e-6);

  const double worst = tone.f0 * c / (c - sweep.v_peak);
  if (!(sweep.v_peak < c) || worst >= out.true_rate / 2.0) {
    throw PreconditionError("render_recording: shifted tone exceeds the receiver Nyquist rate");
  }

  const PlanarPoint dir = placement.Direction();
  auto speaker_at = [&](double tau) {
    return Add(placement.position, Scale(dir, sweep.PositionAt(tau)));
  };
  const double d0 = Norm(Sub(rx.position, speaker_at(0.0)));
  const double delay = d0 / c;

  const auto n = static_cast<std::size_t>(std::llround(sweep.Length() * nominal));
  out.tone.assign(n, 0.0);
  out.frequency.assign(n, tone.f0);
  double phase = 0.0;
  double prev_f = tone.f0;
  bool started = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) / out.true_rate - delay;
    if (tau < 0.0) continue;
    const PlanarPoint r = Sub(rx.position, speaker_at(tau));
    const double d = Norm(r);
    if (d < 1e-6) {
      throw ConfigError("render_recording: receiver '" + receiver_name +
                        "' coincides with the speaker");
    }
    const double v_toward = sweep.VelocityAt(tau) * Dot(dir, r) / d;
    const double f = tone.f0 * c / (c - v_toward);
    if (started) {
      phase += kTwoPi * 0.5 * (prev_f + f) / out.true_rate;
      if (phase > kTwoPi) phase = std::fmod(phase, kTwoPi);
    }
    started = true;
    prev_f = f;
    out.frequency[i] = f;
    const double amp = channel.reference_amplitude * channel.reference_distance / d;
    out.tone[i] = amp * std::sin(phase);
  }

  std::mt19937_64 noise_rng(DeriveSeed(seed, 0x0015e));
  out.noise = RawNoise(channel.noise, n, nominal, noise_rng);
  if (channel.noise != NoiseKind::kNone) {
    const double tone_power = 0.5 * channel.reference_amplitude * channel.reference_amplitude;
    const double target = tone_power / std::pow(10.0, channel.target_snr_db / 10.0);
    const double raw = BandPower(out.noise, nominal, channel.snr_band_low, channel.snr_band_high);
    if (raw > 0.0) {
      const double k = std::sqrt(target / raw);
      for (double& v : out.noise) v *= k;
    }
  }
  return out;
}

Recording RenderRecording(const Scene& scene, const std::string& receiver_name,
                          const SweepTrace& sweep,
                          const SweepPlacement& placement, const ToneSpec& tone,
                          const ChannelParams& channel, std::uint64_t seed) {
  RenderedComponents parts =
      RenderComponents(scene, receiver_name, sweep, placement, tone, channel, seed);
  Recording rec;
  rec.receiver_name = receiver_name;
  rec.nominal_rate = sweep.sample_rate;
  rec.true_rate = parts.true_rate;
  rec.samples.resize(parts.tone.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    double x = parts.tone[i] + parts.noise[i];
    if (channel.quantization == Quantization::kPcm16) {
      x = std::clamp(x, -1.0, 1.0);
      x = static_cast<double>(std::lround(x * 32767.0)) / 32767.0;
    }
    rec.samples[i] = x;
  }
  return rec;
}

// ---- Session ----

TagLayout GroundTruthLayout(const Scene& scene) {
  scene.Validate();
  TagLayout layout;
  struct Placed {
    std::string name;
    CameraView view;
    int label;
  };
  std::vector<Placed> placed;
  auto consider = [&](const Person& p, int label) {
    const CameraView v = ViewFrom(scene.camera_position, scene.optical_axis, p.position);
    layout.angles[p.name] = v.alpha;
    layout.coordinates[p.name] = {v.lateral, v.depth};
    if (v.depth <= 0.0 || std::abs(v.alpha) >= scene.fov / 2.0) {
      layout.excluded[p.name] = ExclusionReason::kOutOfFov;
      return;
    }
    placed.push_back({p.name, v, label});
  };
  for (std::size_t i = 0; i < scene.receivers.size(); ++i) {
    consider(scene.receivers[i],
             scene.rows_ground_truth ? (*scene.rows_ground_truth)[i] : 0);
  }
  const std::size_t receiver_count = placed.size();
  for (const auto& p : scene.bystanders) consider(p, -1);

  // Mean depth per labelled row, from receivers only.
  std::map<int, std::pair<double, int>> sums;
  for (std::size_t i = 0; i < receiver_count; ++i) {
    auto& s = sums[placed[i].label];
    s.first += placed[i].view.depth;
    s.second += 1;
  }
  std::map<int, double> means;
  for (const auto& [label, s] : sums) means[label] = s.first / s.second;
  for (std::size_t i = receiver_count; i < placed.size(); ++i) {
    int best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& [label, m] : means) {
      const double gap = std::abs(m - placed[i].view.depth);
      if (gap < best_gap) {
        best_gap = gap;
        best = label;
      }
    }
    placed[i].label = best;
    if (means.empty()) means[0] = placed[i].view.depth;
  }

  std::vector<std::pair<double, int>> order;
  for (const auto& [label, m] : means) order.push_back({m, label});
  std::sort(order.begin(), order.end());
  for (const auto& [mean, label] : order) {
    std::vector<const Placed*> row;
    for (const auto& p : placed) if (p.label == label) row.push_back(&p);
    if (row.empty()) continue;
    std::sort(row.begin(), row.end(), [](const Placed* a, const Placed* b) {
      return a->view.lateral < b->view.lateral;
    });
    std::vector<std::string> names;
    for (const Placed* p : row) names.push_back(p->name);
    layout.rows.push_back(std::move(names));
  }
  return layout;
}

SimulatedSession SimulateSession(const Scene& scene, const SweepPlan& plan,
                                 const ChannelParams& channel,
                                 std::uint64_t seed,
                                 const SweepOptions& options,
                                 const ToneSpec& tone) {
  channel.Validate();
  SimulatedSession session;
  session.geometry = ResolveSweepPlan(scene, plan);
  session.ground_truth = GroundTruthLayout(scene);

  std::vector<SweepPlacement> placements{session.geometry.a};
  if (session.geometry.b) placements.push_back(*session.geometry.b);
  const std::vector<Person> members = scene.Members();
  for (std::size_t s = 0; s < placements.size(); ++s) {
    SimulatedSweep sweep;
    sweep.placement = placements[s];
    sweep.trace = SynthesizeSweep(placements[s].v_peak, options.duration,
                                  options.lead_in, options.accel_noise_rms,
                                  DeriveSeed(seed, s + 1), options.motion_duration);
    for (std::size_t m = 0; m < members.size(); ++m) {
      sweep.recordings.push_back(RenderRecording(scene, members[m].name, sweep.trace,
                                                 sweep.placement, tone, channel,
                                                 DeriveSeed(seed, s + 1, m + 1)));
    }
    session.sweeps.push_back(std::move(sweep));
  }
  return session;
}

}  // namespace dopplertag::sim
