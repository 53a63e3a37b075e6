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

// Receiver pipeline: bandpass, undersample, frame, detect, refine.

#ifndef DOPPLERTAG_RECEIVER_DSP_H_
#define DOPPLERTAG_RECEIVER_DSP_H_

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dopplertag::dsp {

// Second-order section with a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  // Causal, zero initial state.
  std::vector<double> Apply(std::span<const double> input) const;
  std::complex<double> Response(double frequency, double rate) const;
  double MaxPoleRadius() const;
  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
};

struct FilterSpec {
  int order = 10;  // bandpass order, twice the lowpass prototype order
  double center = 20000.0;
  double bandwidth = 2000.0;
};

// Butterworth bandpass via the bilinear transform with prewarped band edges.
// Unity gain at the band center. Throws PreconditionError when the band does
// not fit in (0, rate/2) or the order is not an even positive number.
SosFilter DesignBandpass(const FilterSpec& spec, double rate);

// Keeps every factor-th sample, starting with the first.
std::vector<double> Decimate(std::span<const double> filtered, int factor);

struct FrameSpec {
  double frame_length = 0.010;  // s
  double overlap = 0.75;
  int fft_points = 2048;
  double rate = 6300.0;

  int FrameSamples() const;
  int Hop() const;
  double BinWidth() const { return rate / fft_points; }
};

struct Spectrogram {
  std::vector<std::vector<double>> magnitude;  // [frame][bin]
  double bin_width = 0.0;
  int hop = 0;
  int frame_samples = 0;

  std::size_t frames() const { return magnitude.size(); }
};

// Hann-windowed, zero-padded frames. Throws PreconditionError when the input
// is shorter than one frame.
Spectrogram FrameSpectra(std::span<const double> decimated, const FrameSpec& spec);

struct DetectionConfig {
  double f0 = 20000.0;
  double input_rate = 44100.0;       // before undersampling
  double band_half_width = 500.0;    // tone band around f0, Hz
  double passband_low = 19000.0;     // filter passband, the energy reference
  double passband_high = 21000.0;
  double energy_ratio = 1.5;
  int min_run = 12;                  // consecutive tone-bearing frames
  int reference_frames = 5;          // minimum frames behind f0_local
  int settle_frames = 2;             // filter start-up frames skipped
  double reference_span = 0.75;      // share of the lead-in used as reference
  int smoothing = 5;                 // median window over the shift track
  double lead_in = 0.2;              // s of stationary tone expected
};

struct Detection {
  double f0_local = 0.0;         // aliased reference frequency, Hz
  double coarse_delta_f = 0.0;   // true-band shift, Hz
  int peak_frame_index = 0;
  bool inverted = false;         // tone sits in a mirrored Nyquist zone
  bool degraded = false;         // no usable stationary reference
  std::vector<int> tone_frames;
  std::vector<double> shift_track;  // smoothed, one per tone frame
};

// Throws ToneNotDetected when no run of min_run frames passes the energy test.
Detection DetectAndExtract(const Spectrogram& spectrogram, const FrameSpec& frames,
                           const DetectionConfig& config);

struct Refinement {
  double delta_f = 0.0;
  bool degraded = false;  // search range empty; coarse value returned
};

// Border-line search in one full-record spectrum around f0_local + shift.
// `inverted` flips between true-band and aliased shift signs.
Refinement RefineShift(std::span<const double> decimated, double rate,
                       double coarse_delta_f, double f0_local, double xi = 10.0,
                       double border_fraction = 0.6627, bool inverted = false);

struct PipelineConfig {
  FilterSpec filter;
  int decimation = 7;
  FrameSpec frames;
  DetectionConfig detection;
  double xi = 10.0;
  // Fraction of the in-range peak that marks the lobe border. Ai(0)/max Ai,
  // the level of the turning point in a swept tone's spectrum.
  double border_fraction = 0.6627;
};

struct ShiftEstimate {
  std::string name;
  double f0_local = 0.0;
  double delta_f = 0.0;
  double coarse_delta_f = 0.0;
  bool detected = false;
  bool degraded = false;
  int peak_frame_index = 0;
};

ShiftEstimate ProcessRecording(std::span<const double> samples, double rate,
                               const PipelineConfig& config = {},
                               const std::string& name = "");

nlohmann::json ToJson(const ShiftEstimate& estimate);

}  // namespace dopplertag::dsp

#endif  // DOPPLERTAG_RECEIVER_DSP_H_
