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

#include "dopplertag/receiver_dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dopplertag/errors.h"
#include "dopplertag/geometry.h"
#include "dopplertag/spectrum.h"

namespace dopplertag::dsp {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Log-parabolic peak interpolation around bin k, in bins.
double InterpolatePeak(std::span<const double> mag, std::size_t k) {
  if (k == 0 || k + 1 >= mag.size()) return static_cast<double>(k);
  const double a = std::log(mag[k - 1] + 1e-300);
  const double b = std::log(mag[k] + 1e-300);
  const double c = std::log(mag[k + 1] + 1e-300);
  const double den = a - 2.0 * b + c;
  if (!(den < 0.0)) return static_cast<double>(k);
  return static_cast<double>(k) + 0.5 * (a - c) / den;
}

struct BinRange {
  std::size_t lo = 0;
  std::size_t hi = 0;  // inclusive
  bool empty() const { return hi < lo; }
};

BinRange Bins(double lo_hz, double hi_hz, double bin_width, std::size_t bins) {
  BinRange r;
  const double lo = std::max(0.0, std::ceil(lo_hz / bin_width - 1e-9));
  const double hi = std::min(static_cast<double>(bins) - 1.0,
                             std::floor(hi_hz / bin_width + 1e-9));
  if (hi < lo) return {1, 0};
  r.lo = static_cast<std::size_t>(lo);
  r.hi = static_cast<std::size_t>(hi);
  return r;
}

double MeanEnergy(std::span<const double> mag, BinRange r) {
  double sum = 0.0;
  for (std::size_t k = r.lo; k <= r.hi; ++k) sum += mag[k] * mag[k];
  return sum / static_cast<double>(r.hi - r.lo + 1);
}

// Interpolated peak frequency within the range.
double PeakFrequency(std::span<const double> mag, BinRange r, double bin_width) {
  std::size_t best = r.lo;
  for (std::size_t k = r.lo; k <= r.hi; ++k) {
    if (mag[k] > mag[best]) best = k;
  }
  return InterpolatePeak(mag, best) * bin_width;
}

// Frames passing the energy test that belong to runs of at least min_run.
std::vector<int> ToneFrames(const Spectrogram& sg, BinRange band, BinRange reference,
                            double ratio, int min_run) {
  std::vector<int> out;
  std::vector<int> run;
  auto flush = [&] {
    if (static_cast<int>(run.size()) >= min_run) out.insert(out.end(), run.begin(), run.end());
    run.clear();
  };
  for (std::size_t i = 0; i < sg.frames(); ++i) {
    const auto& mag = sg.magnitude[i];
    const double ref = MeanEnergy(mag, reference);
    const double in_band = MeanEnergy(mag, band);
    if (ref > 0.0 && in_band >= ratio * ref) {
      run.push_back(static_cast<int>(i));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

double Median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

std::vector<double> MedianSmooth(const std::vector<double>& x, int window) {
  if (window <= 1 || x.size() < 2) return x;
  const int half = window / 2;
  const int n = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    buf.clear();
    for (int j = i - half; j <= i + half; ++j) buf.push_back(x[std::clamp(j, 0, n - 1)]);
    out[i] = Median(buf);
  }
  return out;
}

}  // namespace

// ---- Filter ----

std::vector<double> SosFilter::Apply(std::span<const double> input) const {
  std::vector<double> y(input.begin(), input.end());
  for (const Biquad& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double x = v;
      const double out = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * out + z2;
      z2 = s.b2 * x - s.a2 * out;
      v = out;
    }
  }
  return y;
}

cplx SosFilter::Response(double frequency, double rate) const {
  const cplx z1 = std::polar(1.0, -2.0 * kPi * frequency / rate);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const Biquad& s : sections_) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

double SosFilter::MaxPoleRadius() const {
  double r = 0.0;
  for (const Biquad& s : sections_) {
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max({r, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  return r;
}

SosFilter DesignBandpass(const FilterSpec& spec, double rate) {
  if (spec.order <= 0 || spec.order % 2 != 0) {
    throw PreconditionError("design_bandpass: order must be even and positive");
  }
  const double f_lo = spec.center - spec.bandwidth / 2.0;
  const double f_hi = spec.center + spec.bandwidth / 2.0;
  if (!(rate > 0.0) || !(f_lo > 0.0) || !(f_hi < rate / 2.0) || !(spec.bandwidth > 0.0)) {
    throw PreconditionError("design_bandpass: band must lie inside (0, rate/2)");
  }
  const int n = spec.order / 2;
  const double fs2 = 2.0 * rate;
  const double w1 = fs2 * std::tan(kPi * f_lo / rate);
  const double w2 = fs2 * std::tan(kPi * f_hi / rate);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  // Analog bandpass poles in the upper half plane; each yields one section
  // with its conjugate.
  std::vector<cplx> poles;
  for (int k = 0; k < n; ++k) {
    const cplx p = std::polar(1.0, kPi * (2.0 * k + n + 1) / (2.0 * n));
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0 * w0);
    for (cplx s : {half + root, half - root}) {
      if (s.imag() > 0.0) poles.push_back(s);
    }
  }
  if (static_cast<int>(poles.size()) != n) {
    throw PreconditionError("design_bandpass: band too wide for a resonant design");
  }

  // Digital center: the image of w0 under the bilinear map.
  const double f_center = rate / kPi * std::atan(w0 / fs2);
  std::vector<Biquad> sections;
  for (const cplx& s : poles) {
    const cplx z = (fs2 + s) / (fs2 - s);
    Biquad b;
    b.b0 = 1.0;
    b.b1 = 0.0;
    b.b2 = -1.0;  // zeros at z = 1 (s = 0) and z = -1 (s = infinity)
    b.a1 = -2.0 * z.real();
    b.a2 = std::norm(z);
    const double g = std::abs(SosFilter({b}).Response(f_center, rate));
    b.b0 /= g;
    b.b2 /= g;
    sections.push_back(b);
  }
  return SosFilter(std::move(sections));
}

std::vector<double> Decimate(std::span<const double> filtered, int factor) {
  if (factor < 1) throw PreconditionError("decimate: factor must be positive");
  std::vector<double> out;
  out.reserve(filtered.size() / factor + 1);
  for (std::size_t i = 0; i < filtered.size(); i += factor) out.push_back(filtered[i]);
  return out;
}

// ---- Framing ----

int FrameSpec::FrameSamples() const {
  return static_cast<int>(std::lround(frame_length * rate));
}

int FrameSpec::Hop() const {
  return std::max(1, static_cast<int>(std::lround(FrameSamples() * (1.0 - overlap))));
}

Spectrogram FrameSpectra(std::span<const double> decimated, const FrameSpec& spec) {
  const int frame = spec.FrameSamples();
  const int hop = spec.Hop();
  if (frame < 1 || spec.fft_points < frame) {
    throw PreconditionError("frame_spectra: frame longer than the FFT");
  }
  if (decimated.size() < static_cast<std::size_t>(frame)) {
    throw PreconditionError("frame_spectra: recording shorter than one frame");
  }
  const std::size_t count = (decimated.size() - frame) / hop + 1;
  const std::vector<double> window = HannWindow(frame);
  RealFft fft(spec.fft_points);
  Spectrogram sg;
  sg.bin_width = spec.BinWidth();
  sg.hop = hop;
  sg.frame_samples = frame;
  sg.magnitude.resize(count);
  std::vector<double> buf(frame);
  for (std::size_t i = 0; i < count; ++i) {
    for (int j = 0; j < frame; ++j) buf[j] = decimated[i * hop + j] * window[j];
    const auto bins = fft.Forward(buf);
    auto& mag = sg.magnitude[i];
    mag.resize(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) mag[k] = std::abs(bins[k]);
  }
  return sg;
}

// ---- Detection ----

Detection DetectAndExtract(const Spectrogram& sg, const FrameSpec& frames,
                           const DetectionConfig& config) {
  using geometry::AliasFrequency;
  if (sg.frames() == 0) throw ToneNotDetected("no frames to analyze");
  const std::size_t bins = sg.magnitude.front().size();
  const double bw = sg.bin_width;

  const auto center = AliasFrequency(config.f0, frames.rate);
  const auto p_lo = AliasFrequency(config.passband_low, frames.rate);
  const auto p_hi = AliasFrequency(config.passband_high, frames.rate);
  const BinRange reference = Bins(std::min(p_lo.frequency, p_hi.frequency),
                                  std::max(p_lo.frequency, p_hi.frequency), bw, bins);
  const double half = config.band_half_width;
  const BinRange nominal = Bins(center.frequency - half, center.frequency + half, bw, bins);
  if (reference.empty() || nominal.empty()) {
    throw PreconditionError("detect_and_extract: tone band outside the spectrum");
  }

  // Pass 1 on the nominal band locates the stationary reference.
  std::vector<int> first = ToneFrames(sg, nominal, reference, config.energy_ratio, config.min_run);
  if (first.empty()) throw ToneNotDetected("no tone-bearing frames");

  Detection d;
  d.inverted = center.inverted;
  const double frame_period = static_cast<double>(sg.hop) / frames.rate;
  const double start_time = static_cast<double>(first.front()) * frame_period;
  // Frames of the first run that lie inside the stationary lead-in, past the
  // filter's start-up transient.
  std::vector<int> ref;
  if (start_time <= config.lead_in) {
    const double ref_end = config.reference_span * config.lead_in;
    for (std::size_t k = 0; k < first.size(); ++k) {
      if (k > 0 && first[k] != first[k - 1] + 1) break;
      if (static_cast<int>(k) < config.settle_frames) continue;
      const double t = static_cast<double>(first[k]) * frame_period;
      if (t + static_cast<double>(sg.frame_samples) / frames.rate > ref_end &&
          static_cast<int>(ref.size()) >= config.reference_frames) {
        break;
      }
      ref.push_back(first[k]);
    }
  }
  if (ref.empty()) {
    d.f0_local = center.frequency;
    d.degraded = true;
  } else {
    std::vector<double> peaks;
    for (int i : ref) peaks.push_back(PeakFrequency(sg.magnitude[i], nominal, bw));
    d.f0_local = Median(peaks);
  }
  // Frames up to the end of the reference are stationary by assumption.
  const int motion_from = ref.empty() ? first.front() + config.settle_frames : ref.back() + 1;

  // Pass 2 tracks the band around the local reference.
  const BinRange tracked = Bins(d.f0_local - half, d.f0_local + half, bw, bins);
  d.tone_frames = ToneFrames(sg, tracked, reference, config.energy_ratio, config.min_run);
  if (d.tone_frames.empty()) throw ToneNotDetected("tone lost after reference tracking");

  const double sign = d.inverted ? -1.0 : 1.0;
  std::vector<double> raw;
  raw.reserve(d.tone_frames.size());
  for (int i : d.tone_frames) {
    raw.push_back(sign * (PeakFrequency(sg.magnitude[i], tracked, bw) - d.f0_local));
  }
  d.shift_track = MedianSmooth(raw, config.smoothing);
  std::size_t best = d.shift_track.size();
  for (std::size_t i = 0; i < d.shift_track.size(); ++i) {
    if (d.tone_frames[i] < motion_from) continue;
    if (best == d.shift_track.size() || std::abs(d.shift_track[i]) > std::abs(d.shift_track[best])) best = i;
  }
  if (best == d.shift_track.size()) throw ToneNotDetected("tone ends before the sweep");
  d.coarse_delta_f = d.shift_track[best];
  d.peak_frame_index = d.tone_frames[best];
  return d;
}

Refinement RefineShift(std::span<const double> decimated, double rate,
                       double coarse_delta_f, double f0_local, double xi,
                       double border_fraction, bool inverted) {
  if (!(xi > 0.0)) throw PreconditionError("refine_shift: xi must be positive");
  if (decimated.empty()) throw PreconditionError("refine_shift: empty record");
  const std::size_t size = NextPowerOfTwo(std::max<std::size_t>(2048, decimated.size()));
  const std::vector<double> window = HannWindow(decimated.size());
  std::vector<double> buf(decimated.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = decimated[i] * window[i];
  RealFft fft(size);
  const auto spec = fft.Forward(buf);
  std::vector<double> mag(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) mag[k] = std::abs(spec[k]);
  const double df = rate / static_cast<double>(size);

  const double sign = inverted ? -1.0 : 1.0;
  const double target = f0_local + sign * coarse_delta_f;
  const BinRange r = Bins(target - xi, target + xi, df, mag.size());
  if (r.empty()) return {coarse_delta_f, true};

  std::size_t peak = r.lo;
  for (std::size_t k = r.lo; k <= r.hi; ++k) {
    if (mag[k] > mag[peak]) peak = k;
  }
  const double aliased_shift = sign * coarse_delta_f;
  if (aliased_shift == 0.0) {
    return {sign * (static_cast<double>(peak) * df - f0_local), false};
  }
  const long step = aliased_shift > 0.0 ? 1 : -1;
  const double threshold = border_fraction * mag[peak];
  long k = static_cast<long>(peak);
  const long lo = static_cast<long>(r.lo), hi = static_cast<long>(r.hi);
  while (k + step >= lo && k + step <= hi && mag[k + step] >= threshold) k += step;
  double f = static_cast<double>(k) * df;
  if (k + step >= lo && k + step <= hi && mag[k] > mag[k + step]) {
    const double frac = (mag[k] - threshold) / (mag[k] - mag[k + step]);
    f += static_cast<double>(step) * frac * df;
  }
  return {sign * (f - f0_local), false};
}

ShiftEstimate ProcessRecording(std::span<const double> samples, double rate,
                               const PipelineConfig& config, const std::string& name) {
  if (!(rate > 0.0) || config.decimation < 1) {
    throw PreconditionError("process_recording: bad rate or decimation factor");
  }
  const double decimated_rate = rate / config.decimation;
  if (std::abs(decimated_rate - config.frames.rate) > 1e-6 * rate) {
    throw PreconditionError("process_recording: frame rate does not match rate / decimation");
  }
  DetectionConfig detection = config.detection;
  detection.input_rate = rate;

  const SosFilter filter = DesignBandpass(config.filter, rate);
  const std::vector<double> filtered = filter.Apply(samples);
  const std::vector<double> decimated = Decimate(filtered, config.decimation);
  const Spectrogram sg = FrameSpectra(decimated, config.frames);
  const Detection d = DetectAndExtract(sg, config.frames, detection);
  const Refinement r = RefineShift(decimated, config.frames.rate, d.coarse_delta_f,
                                   d.f0_local, config.xi, config.border_fraction, d.inverted);
  ShiftEstimate est;
  est.name = name;
  est.f0_local = d.f0_local;
  est.coarse_delta_f = d.coarse_delta_f;
  est.delta_f = r.delta_f;
  est.detected = true;
  est.degraded = d.degraded || r.degraded;
  est.peak_frame_index = d.peak_frame_index;
  return est;
}

nlohmann::json ToJson(const ShiftEstimate& e) {
  return {{"name", e.name},
          {"f0_local", e.f0_local},
          {"delta_f", e.delta_f},
          {"coarse_delta_f", e.coarse_delta_f},
          {"detected", e.detected},
          {"degraded", e.degraded},
          {"peak_frame_index", e.peak_frame_index}};
}

}  // namespace dopplertag::dsp
