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

#ifndef DOPPLERTAG_SPECTRUM_H_
#define DOPPLERTAG_SPECTRUM_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace dopplertag {

// Real-to-complex FFT of a fixed length. Shorter inputs are zero-padded.
// Not thread-safe; give each thread its own instance.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // Returns size()/2 + 1 bins; valid until the next call.
  std::span<const std::complex<double>> Forward(std::span<const double> input);

 private:
  struct Plan;
  std::size_t size_;
  std::unique_ptr<Plan> plan_;
};

std::size_t NextPowerOfTwo(std::size_t n);

// Symmetric Hann taper of the given length.
std::vector<double> HannWindow(std::size_t length);

// Mean power of `samples` carried in [low_hz, high_hz], from an unpadded
// rectangular-window periodogram (Parseval-normalized).
double BandPower(std::span<const double> samples, double rate, double low_hz,
                 double high_hz);

}  // namespace dopplertag

#endif  // DOPPLERTAG_SPECTRUM_H_
