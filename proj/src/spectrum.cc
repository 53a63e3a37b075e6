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

#include "dopplertag/spectrum.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dopplertag/errors.h"

namespace dopplertag {

struct RealFft::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Plan(std::size_t n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~Plan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size < 2) throw DomainError("FFT size must be at least 2");
  plan_ = std::make_unique<Plan>(size);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::span<const std::complex<double>> RealFft::Forward(
    std::span<const double> input) {
  if (input.size() > size_) throw DomainError("FFT input longer than size");
  std::copy(input.begin(), input.end(), plan_->in);
  std::fill(plan_->in + input.size(), plan_->in + size_, 0.0);
  fftw_execute(plan_->plan);
  // fftw_complex is layout-compatible with std::complex<double>.
  return {reinterpret_cast<const std::complex<double>*>(plan_->out), bins()};
}

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> HannWindow(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (length - 1));
  }
  return w;
}

double BandPower(std::span<const double> samples, double rate, double low_hz,
                 double high_hz) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  RealFft fft(n);
  const auto spec = fft.Forward(samples);
  const double bin_hz = rate / n;
  double sum = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = k * bin_hz;
    if (f < low_hz || f > high_hz) continue;
    // One-sided: double everything except DC and Nyquist.
    const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
    sum += std::norm(spec[k]) * (edge ? 1.0 : 2.0);
  }
  return sum / (static_cast<double>(n) * n);
}

}  // namespace dopplertag
