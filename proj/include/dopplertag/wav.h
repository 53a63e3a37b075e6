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

// Minimal RIFF/WAVE support: 16-bit PCM, mono.

#ifndef DOPPLERTAG_WAV_H_
#define DOPPLERTAG_WAV_H_

#include <span>
#include <string>
#include <vector>

namespace dopplertag {

struct WavData {
  std::vector<double> samples;  // [-1, 1]
  int sample_rate = 44100;
};

// Samples are clipped to [-1, 1] and scaled by 32767.
void WriteWavPcm16(const std::string& path, std::span<const double> samples,
                   int sample_rate);

// Throws IoError on unreadable files and ParseError on anything other than
// mono 16-bit PCM.
WavData ReadWavPcm16(const std::string& path);

}  // namespace dopplertag

#endif  // DOPPLERTAG_WAV_H_
