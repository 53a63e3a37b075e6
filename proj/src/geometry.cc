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

#include "dopplertag/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dopplertag/errors.h"

namespace dopplertag::geometry {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kParallelTolerance = 1e-9;

}  // namespace

void PhysicsConstants::Validate() const {
  if (!(sound_speed > 0.0) || !std::isfinite(sound_speed)) {
    throw DomainError("sound_speed must be positive");
  }
  if (!(tone_frequency > 0.0) || !(tone_frequency < kCaptureNyquist)) {
    throw DomainError("tone_frequency must lie in (0, 22050) Hz");
  }
}

void SweepParams::Validate() const {
  if (!(peak_speed > 0.0)) throw DomainError("peak_speed must be positive");
  const double norm = std::hypot(direction_x, direction_y);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw DomainError("sweep direction must be a unit vector");
  }
  if (speaker_gap < 0.0) throw DomainError("speaker_gap must be >= 0");
  if (!(fov > 0.0 && fov < kPi)) throw DomainError("fov must lie in (0, pi)");
}

double DopplerFrequency(double f0, double c, double v_sender_toward,
                        double v_receiver_toward) {
  if (std::abs(v_sender_toward) >= c) {
    throw DomainError("sender speed must be below the speed of sound");
  }
  return (c + v_receiver_toward) / (c - v_sender_toward) * f0;
}

double ShiftForGeometry(double theta, double v_sender, double c, double f0) {
  return DopplerFrequency(f0, c, v_sender * std::cos(theta), 0.0);
}

AngleResult AngleFromShift(double observed_f, double f0, double c,
                           double v_sender) {
  if (!(v_sender > 0.0)) throw DomainError("sender speed must be positive");
  if (!(observed_f > 0.0)) throw DomainError("observed frequency must be > 0");
  double arg = (c / v_sender) * (1.0 - f0 / observed_f);
  if (std::abs(arg) > 1.0 + kArccosTolerance) {
    throw InconsistentMeasurement(
        "shift of " + std::to_string(observed_f - f0) +
        " Hz is too large for sender speed " + std::to_string(v_sender) +
        " m/s");
  }
  arg = std::clamp(arg, -1.0, 1.0);
  AngleResult out;
  out.theta = std::acos(arg);
  out.alpha = std::abs(kPi / 2.0 - out.theta);
  if (observed_f > f0) {
    out.side = Side::kLeft;
  } else if (observed_f < f0) {
    out.side = Side::kRight;
  }
  return out;
}

double CameraCorrectedAngle(double alpha, double gap, double distance,
                            AxisSide side) {
  if (!(alpha >= 0.0 && alpha < kPi / 2.0)) {
    throw DomainError("alpha must lie in [0, pi/2)");
  }
  if (!(distance > 0.0)) throw DomainError("distance must be positive");
  const double away = std::atan(std::tan(alpha) + gap / distance);
  const double toward = std::atan(std::tan(alpha) - gap / distance);
  switch (side) {
    case AxisSide::kAwayFromSpeaker:
      return away;
    case AxisSide::kTowardSpeaker:
      return toward;
    case AxisSide::kUnknown:
      break;
  }
  return std::abs(alpha - toward) > std::abs(alpha - away) ? toward : away;
}

VelocityIntegration IntegrateVelocity(std::span<const double> accel, double v0,
                                      double dt) {
  if (accel.empty()) throw DomainError("no accelerometer samples");
  if (!(dt > 0.0)) throw DomainError("sampling interval must be positive");
  VelocityIntegration out;
  out.velocity.reserve(accel.size());
  double v = v0;
  for (std::size_t k = 0; k < accel.size(); ++k) {
    v += accel[k] * dt;
    out.velocity.push_back(v);
    if (std::abs(v) > out.peak) {
      out.peak = std::abs(v);
      out.peak_index = k;
    }
  }
  if (out.peak == 0.0) out.peak_index = 0;
  return out;
}

double MinDistinguishableBeta(double alpha, const ResolutionParams& res,
                              double v_sender, double c, double f0) {
  if (!(alpha > 0.0 && alpha < kPi)) throw DomainError("alpha must lie in (0, pi)");
  if (!(v_sender > 0.0)) throw DomainError("sender speed must be positive");
  const double q = res.Q(f0);
  const double cos_a = std::cos(alpha);
  const double bound = (-q * c + v_sender * cos_a * (1.0 + q)) /
                       (v_sender * (1.0 - q + q * v_sender * cos_a / c));
  if (!(bound >= -1.0 && bound <= 1.0)) {
    throw NoSolution("no distinguishable beta in (0, pi) for alpha = " +
                     std::to_string(RadToDeg(alpha)) + " deg");
  }
  return std::acos(bound);
}

bool ResolutionPredicate(double alpha, double beta, const ResolutionParams& res,
                         double v_sender, double c, double f0) {
  if (!(std::cos(alpha) > std::cos(beta))) {
    throw PreconditionError("resolution predicate requires cos(alpha) > cos(beta)");
  }
  const double lhs = (1.0 / (c - v_sender * std::cos(alpha)) -
                      1.0 / (c - v_sender * std::cos(beta))) *
                     c * f0 * res.fft_points / res.sample_rate;
  return lhs > 1.0;
}

bool UndersamplingRateValid(double f_low, double f_high, double new_rate,
                            int n) {
  if (!(f_low > 0.0 && f_low < f_high) || n < 1) {
    throw PreconditionError("undersampling needs 0 < f_low < f_high and n >= 1");
  }
  const int n_max = static_cast<int>(std::floor(f_high / (f_high - f_low)));
  if (n > n_max) return false;
  if (new_rate < 2.0 * f_high / n) return false;
  if (n == 1) return true;
  return new_rate <= 2.0 * f_low / (n - 1);
}

AliasResult AliasFrequency(double f, double new_rate) {
  if (!(f > 0.0) || !(new_rate > 0.0)) {
    throw DomainError("alias_frequency needs positive frequency and rate");
  }
  const double half = new_rate / 2.0;
  const double zone = std::floor(f / half);
  const double rem = f - zone * half;
  const bool odd = std::fmod(zone, 2.0) != 0.0;
  return odd ? AliasResult{half - rem, true} : AliasResult{rem, false};
}

PlanarPoint IntersectTwoSweeps(double alpha, double beta, double L, double W) {
  if (!(L > 0.0) || !(W > 0.0)) throw DomainError("L and W must be positive");
  // A + t * (sin a, -cos a) = B + s * (cos b, sin b)
  const double det = -std::cos(alpha - beta);
  if (std::abs(det) < kParallelTolerance) {
    throw DegenerateGeometry("sweep bearing lines are parallel");
  }
  const double t = (W * std::sin(beta) - L * std::cos(beta)) / det;
  return PlanarPoint{t * std::sin(alpha), L - t * std::cos(alpha)};
}

bool InFov(double alpha, double fov) { return alpha < fov / 2.0; }

}  // namespace dopplertag::geometry
