// Copyright (c) 2026 The resunet-sv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "binary_io.h"
#include "sv/corpus_io.h"
#include "sv/error.h"

namespace sv {

using internal::GetLe;
using internal::PutLe;

namespace {

constexpr int kPipelineSampleRate = 16000;

}  // namespace

Waveform ReadWav(const std::string& path) {
  auto is = internal::OpenForRead(path, true);
  auto truncated = [&]() {
    return Error(ErrorKind::kParse, path + ": truncated WAV file");
  };
  char riff[4], wave[4];
  std::uint32_t riff_size = 0;
  if (!is.read(riff, 4) || !GetLe(is, &riff_size) || !is.read(wave, 4)) {
    throw truncated();
  }
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kUnsupportedFormat, path + ": not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (true) {
    char id[4];
    std::uint32_t size = 0;
    if (!is.read(id, 4) || !GetLe(is, &size)) throw truncated();
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorKind::kParse, path + ": short fmt chunk");
      std::uint32_t byte_rate = 0;
      std::uint16_t block_align = 0;
      if (!GetLe(is, &format) || !GetLe(is, &channels) || !GetLe(is, &rate) ||
          !GetLe(is, &byte_rate) || !GetLe(is, &block_align) ||
          !GetLe(is, &bits)) {
        throw truncated();
      }
      // Skip extension bytes and the pad byte of odd-sized chunks.
      is.seekg(size - 16 + (size & 1), std::ios::cur);
      if (!is) throw truncated();
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorKind::kParse, path + ": data before fmt");
      // WAVE_FORMAT_EXTENSIBLE is not accepted; only plain PCM.
      if (format != 1 || bits != 16) {
        throw Error(ErrorKind::kUnsupportedFormat,
                    path + ": only 16-bit PCM is supported");
      }
      if (channels != 1) {
        throw Error(ErrorKind::kUnsupportedFormat,
                    path + ": only mono is supported, got " +
                        std::to_string(channels) + " channels");
      }
      if (rate != kPipelineSampleRate) {
        throw Error(ErrorKind::kUnsupportedFormat,
                    path + ": sample rate " + std::to_string(rate) +
                        " != 16000");
      }
      if (size % 2 != 0) throw Error(ErrorKind::kParse, path + ": odd data size");
      const std::size_t n = size / 2;
      if (n == 0) throw Error(ErrorKind::kParse, path + ": no samples");
      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::int16_t v = 0;
        if (!GetLe(is, &v)) throw truncated();
        w.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return w;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
      if (!is) throw truncated();
    }
  }
}

void WriteWav(const Waveform& wave, const std::string& path) {
  auto os = internal::OpenForWrite(path, true);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(wave.samples.size() * 2);
  os.write("RIFF", 4);
  PutLe<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  PutLe<std::uint32_t>(os, 16);
  PutLe<std::uint16_t>(os, 1);
  PutLe<std::uint16_t>(os, 1);
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(wave.sample_rate));
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(wave.sample_rate * 2));
  PutLe<std::uint16_t>(os, 2);
  PutLe<std::uint16_t>(os, 16);
  os.write("data", 4);
  PutLe<std::uint32_t>(os, data_bytes);
  for (float x : wave.samples) {
    const double scaled = std::round(std::clamp<double>(x, -1.0, 1.0) * 32768.0);
    PutLe<std::int16_t>(
        os, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
  }
  internal::FinishWrite(os, path);
}

}  // namespace sv
