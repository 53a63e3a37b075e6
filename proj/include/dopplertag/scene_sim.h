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

// Deterministic synthesis of sweep gestures and receiver recordings.
//
// World frame: meters, x/y in the horizontal plane. A camera looks along its
// unit optical axis; its left is the axis rotated +90 degrees. Every sweep
// moves the speaker toward the left of the camera it belongs to, with the
// peak of the gesture at the camera position.

#ifndef DOPPLERTAG_SCENE_SIM_H_
#define DOPPLERTAG_SCENE_SIM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dopplertag/geometry.h"
#include "dopplertag/layout.h"

namespace dopplertag::sim {

using geometry::PlanarPoint;

// Gaussian accelerometer error per 100 Hz reading. Chosen so the measured
// peak speed of a 3.4 m/s gesture has an RMS error of about 0.10 m/s.
inline constexpr double kDefaultAccelNoiseRms = 1.2;
inline constexpr double kDefaultMotionDuration = 0.2;  // s
inline constexpr double kAccelInterval = 0.01;         // s
inline constexpr double kNominalRate = 44100.0;        // Hz

struct Person {
  std::string name;
  PlanarPoint position;
};

struct Scene {
  PlanarPoint camera_position{0.0, 3.0};
  PlanarPoint optical_axis{0.0, -1.0};
  double fov = geometry::DegToRad(70.0);
  std::vector<Person> receivers;
  // Row index per receiver (same order as `receivers`), if known.
  std::optional<std::vector<int>> rows_ground_truth;
  // Group members placed away from the picture.
  std::vector<Person> bystanders;

  // Throws ConfigError naming the offending field.
  void Validate() const;
  // Receivers followed by bystanders.
  std::vector<Person> Members() const;
  const Person& Find(const std::string& name) const;
  int RowCount() const;
};

// Rotate a direction by +90 degrees.
inline PlanarPoint LeftOf(PlanarPoint dir) { return {-dir.y, dir.x}; }

// Where `point` appears to a camera at `position` looking along `axis`.
struct CameraView {
  double lateral = 0.0;  // to the camera's right, m
  double depth = 0.0;    // along the axis, m
  double alpha = 0.0;    // signed angle off axis, positive to the left
};

CameraView ViewFrom(PlanarPoint position, PlanarPoint axis, PlanarPoint point);

struct SweepPlacement {
  SweepId id = SweepId::kA;
  PlanarPoint position;
  PlanarPoint facing{0.0, -1.0};
  double v_peak = 3.4;

  PlanarPoint Direction() const { return LeftOf(facing); }
};

// The second sweep sits at distance W from the group center on the camera's
// right, facing across the group; the group center lies L ahead of camera A.
struct SecondSweep {
  double distance_l = 3.0;
  double distance_w = 3.0;
  double v_peak = 3.4;
};

struct SweepPlan {
  double v_peak_a = 3.4;
  std::optional<SecondSweep> second;
};

struct SweepGeometry {
  SweepPlacement a;
  std::optional<SweepPlacement> b;
  double distance_l = 0.0;
  double distance_w = 0.0;
  PlanarPoint group_center;
};

// Throws ConfigError when the plan cannot serve the scene.
SweepGeometry ResolveSweepPlan(const Scene& scene, const SweepPlan& plan);

struct SweepTrace {
  double v_peak = 0.0;
  double duration = 1.0;   // tone emission after the lead-in, s
  double lead_in = 0.2;    // stationary emission before the gesture, s
  double motion_duration = kDefaultMotionDuration;
  double sample_rate = kNominalRate;
  // Displacement along the sweep direction relative to the peak-speed point,
  // and speed, sampled at sample_rate from t = 0.
  std::vector<double> positions;
  std::vector<double> velocities;
  // Accelerometer at 100 Hz; reading j covers [j dt, (j+1) dt).
  std::vector<double> accel_readings;
  double accel_dt = kAccelInterval;

  double Length() const { return lead_in + duration; }
  double MotionStart() const;
  double VelocityAt(double t) const;
  double PositionAt(double t) const;
};

// Raised-cosine speed pulse of `motion_duration` peaking at v_peak, centered
// in the emission window. Accelerometer readings are the interval-averaged
// derivative plus seeded Gaussian error of accel_noise_rms.
SweepTrace SynthesizeSweep(double v_peak, double duration, double lead_in,
                           double accel_noise_rms, std::uint64_t seed,
                           double motion_duration = kDefaultMotionDuration,
                           double sample_rate = kNominalRate);

enum class NoiseKind { kNone, kAmbient, kMusic, kConversation };
enum class Quantization { kFloat, kPcm16 };

std::string_view ToString(NoiseKind kind);
NoiseKind NoiseKindFromString(std::string_view text);

struct ChannelParams {
  NoiseKind noise = NoiseKind::kAmbient;
  // In-band SNR of a tone received at reference_distance. Amplitude falls as
  // 1/distance, so farther receivers see a lower SNR.
  double target_snr_db = 10.0;
  double reference_distance = 3.0;
  double reference_amplitude = 0.1;
  double snr_band_low = 19500.0;
  double snr_band_high = 20500.0;
  // Fixed clock offset; when unset each receiver draws uniformly from
  // [-max_clock_offset_ppm, max_clock_offset_ppm].
  std::optional<double> clock_offset_ppm;
  double max_clock_offset_ppm = 30.0;
  Quantization quantization = Quantization::kPcm16;

  static ChannelParams Quiet();
  void Validate() const;
};

struct ToneSpec {
  double f0 = geometry::kDefaultToneFrequency;
  double bandwidth = 2000.0;
  double sound_speed = geometry::kDefaultSoundSpeed;
};

struct Recording {
  std::vector<double> samples;
  double nominal_rate = kNominalRate;
  double true_rate = kNominalRate;
  std::string receiver_name;
};

// Tone and noise before they are summed and quantized.
struct RenderedComponents {
  std::vector<double> tone;
  std::vector<double> noise;
  // Instantaneous tone frequency per sample; f0 before the tone arrives.
  std::vector<double> frequency;
  double true_rate = kNominalRate;
  double clock_offset_ppm = 0.0;
};

RenderedComponents RenderComponents(const Scene& scene,
                                    const std::string& receiver_name,
                                    const SweepTrace& sweep,
                                    const SweepPlacement& placement,
                                    const ToneSpec& tone,
                                    const ChannelParams& channel,
                                    std::uint64_t seed);

Recording RenderRecording(const Scene& scene, const std::string& receiver_name,
                          const SweepTrace& sweep,
                          const SweepPlacement& placement, const ToneSpec& tone,
                          const ChannelParams& channel, std::uint64_t seed);

struct SweepOptions {
  double duration = 1.0;
  double lead_in = 0.2;
  double motion_duration = kDefaultMotionDuration;
  double accel_noise_rms = kDefaultAccelNoiseRms;
};

struct SimulatedSweep {
  SweepPlacement placement;
  SweepTrace trace;
  std::vector<Recording> recordings;  // one per member, Members() order
};

struct SimulatedSession {
  std::vector<SimulatedSweep> sweeps;
  SweepGeometry geometry;
  TagLayout ground_truth;
};

SimulatedSession SimulateSession(const Scene& scene, const SweepPlan& plan,
                                 const ChannelParams& channel,
                                 std::uint64_t seed,
                                 const SweepOptions& options = {},
                                 const ToneSpec& tone = {});

// Layout implied by geometry alone: FOV membership from the camera, rows from
// rows_ground_truth ordered by mean depth, left-to-right by lateral offset.
TagLayout GroundTruthLayout(const Scene& scene);

// Deterministic seed mixing (splitmix64 finalizer).
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a,
                         std::uint64_t b = 0);

}  // namespace dopplertag::sim

#endif  // DOPPLERTAG_SCENE_SIM_H_
