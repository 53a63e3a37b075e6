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

// Closed-form Doppler physics and sweep geometry. Every function here is a
// pure function of its arguments.

#ifndef DOPPLERTAG_GEOMETRY_H_
#define DOPPLERTAG_GEOMETRY_H_

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace dopplertag::geometry {

constexpr double kDefaultSoundSpeed = 340.0;    // m/s
constexpr double kDefaultToneFrequency = 20000.0;  // Hz
constexpr double kCaptureNyquist = 22050.0;     // Hz, 44.1 kHz capture
constexpr double kArccosTolerance = 1e-6;

constexpr double DegToRad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double RadToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct PhysicsConstants {
  double sound_speed = kDefaultSoundSpeed;
  double tone_frequency = kDefaultToneFrequency;

  // Throws DomainError when either field is out of range.
  void Validate() const;
};

struct SweepParams {
  double peak_speed = 3.4;          // v_S, m/s
  double direction_x = -1.0;        // unit vector, camera frame (leftward)
  double direction_y = 0.0;
  double speaker_gap = 0.095;       // camera-speaker offset, m
  double fov = DegToRad(70.0);      // radians

  void Validate() const;
};

enum class Side { kLeft, kRight, kUnknown };

struct AngleResult {
  double theta = 0.0;  // angle to the direction of motion, [0, pi]
  double alpha = 0.0;  // angle to the optical axis, |pi/2 - theta|
  Side side = Side::kUnknown;

  // alpha with sign: positive on the camera's left (the side the speaker
  // moves toward), negative on its right.
  double SignedAlpha() const { return side == Side::kRight ? -alpha : alpha; }
};

// FFT resolution setup. Q is derived, never stored.
struct ResolutionParams {
  double sample_rate = 44100.0;
  int fft_points = 2048;

  double Q(double tone_frequency) const {
    return sample_rate / (tone_frequency * fft_points);
  }
};

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

// Receiver position relative to the optical axis, seen from the speaker side.
enum class AxisSide { kTowardSpeaker, kAwayFromSpeaker, kUnknown };

// Observed frequency for a sender moving toward the receiver at
// `v_sender_toward` and a receiver moving toward the sender at
// `v_receiver_toward`. Throws DomainError when |v_sender_toward| >= c.
double DopplerFrequency(double f0, double c, double v_sender_toward,
                        double v_receiver_toward);

// Frequency heard by a stationary receiver at angle `theta` from the sender's
// direction of motion.
double ShiftForGeometry(double theta, double v_sender, double c, double f0);

// Inverts the angular Doppler relation. The arccos argument is clamped when it
// overshoots [-1, 1] by at most kArccosTolerance; larger overshoots throw
// InconsistentMeasurement.
AngleResult AngleFromShift(double observed_f, double f0, double c,
                           double v_sender);

// Angle to the camera given the angle to the speaker, the camera-speaker gap
// and the subject distance. kUnknown reports the worse of the two signs.
double CameraCorrectedAngle(double alpha, double gap, double distance,
                            AxisSide side);

struct VelocityIntegration {
  std::vector<double> velocity;
  double peak = 0.0;            // max |v|
  std::size_t peak_index = 0;   // first occurrence
};

// Rectangle-rule integration of accelerometer samples:
// v[k] = v0 + sum_{j<=k} a[j] * dt.
VelocityIntegration IntegrateVelocity(std::span<const double> accel,
                                      double v0, double dt = 0.01);

// Smallest beta (radians) that can be told apart from `alpha` with one FFT
// bin of separation. Both angles are measured from the direction of motion.
// Throws NoSolution when the bound on cos(beta) leaves [-1, 1].
double MinDistinguishableBeta(double alpha, const ResolutionParams& res,
                              double v_sender, double c, double f0);

// True iff the shifts at alpha and beta differ by more than one FFT bin.
// Requires cos(alpha) > cos(beta).
bool ResolutionPredicate(double alpha, double beta, const ResolutionParams& res,
                         double v_sender, double c, double f0);

// Bandpass sampling condition for the band [f_low, f_high] at `new_rate`
// with integer decimation zone `n`.
bool UndersamplingRateValid(double f_low, double f_high, double new_rate,
                            int n);

struct AliasResult {
  double frequency = 0.0;
  bool inverted = false;  // odd Nyquist zone: spectrum is mirrored
};

AliasResult AliasFrequency(double f, double new_rate);

// Intersection of the bearing line from sweep position A = (0, L) at signed
// angle `alpha` and from sweep position B = (-W, 0) at signed angle `beta`.
// A faces -y and B faces +x; positive angles are toward each camera's left.
// Throws DegenerateGeometry when the lines are parallel.
PlanarPoint IntersectTwoSweeps(double alpha, double beta, double L, double W);

// Strict inclusion: alpha < fov / 2.
bool InFov(double alpha, double fov);

}  // namespace dopplertag::geometry

#endif  // DOPPLERTAG_GEOMETRY_H_
