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

#include "dopplertag/wav.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dopplertag/errors.h"

namespace dopplertag {
namespace {

void PutU32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t GetU32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

std::uint16_t GetU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void WriteWavPcm16(const std::string& path, std::span<const double> samples,
                   int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<char> buf;
  buf.reserve(44 + data_bytes);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  PutU32(buf, 36 + data_bytes);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(buf, 16);
  PutU16(buf, 1);  // PCM
  PutU16(buf, 1);  // mono
  PutU32(buf, static_cast<std::uint32_t>(sample_rate));
  PutU32(buf, static_cast<std::uint32_t>(sample_rate) * 2);
  PutU16(buf, 2);
  PutU16(buf, 16);
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  PutU32(buf, data_bytes);
  for (double s : samples) {
    const auto q = static_cast<std::int16_t>(
        std::lround(std::clamp(s, -1.0, 1.0) * 32767.0));
    PutU16(buf, static_cast<std::uint16_t>(q));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path);
}

WavData ReadWavPcm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ParseError(path + ": not a RIFF/WAVE file");
  }
  WavData out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = GetU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw ParseError(path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError(path + ": short fmt chunk");
      const std::uint16_t format = GetU16(bytes.data() + body);
      const std::uint16_t channels = GetU16(bytes.data() + body + 2);
      out.sample_rate = static_cast<int>(GetU32(bytes.data() + body + 4));
      const std::uint16_t bits = GetU16(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw ParseError(path + ": expected mono 16-bit PCM");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw ParseError(path + ": data chunk before fmt");
      out.samples.reserve(size / 2);
      for (std::size_t i = 0; i + 1 < size; i += 2) {
        const auto raw = static_cast<std::int16_t>(GetU16(bytes.data() + body + i));
        out.samples.push_back(std::max(-1.0, raw / 32767.0));
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw ParseError(path + ": no data chunk");
}

}  // namespace dopplertag
