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

#ifndef SV_DSP_H_
#define SV_DSP_H_

#include <string>

#include "sv/corpus_io.h"
#include "sv/matrix.h"
#include "sv/random.h"

namespace sv {

enum class WindowType { kHamming, kHanning, kRectangular };

struct FbankConfig {
  int sample_rate = 16000;
  int n_mels = 64;
  int frame_length = 400;  // 25 ms
  int frame_shift = 160;   // 10 ms
  int fft_size = 512;
  WindowType window = WindowType::kHamming;
  double dither = 0.0;
  std::uint64_t dither_seed = 0;
  double floor = 1e-10;
  double low_freq = 20.0;
  double high_freq = 7600.0;

  // Throws ConfigError.
  void Validate() const;
};

// Time-major T x n_mels log-Mel energies.
struct FeatureMatrix {
  RowMatrix frames;
  int frame_shift = 160;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

double HzToMel(double hz);
double MelToHz(double mel);

// n_mels x (fft_size/2 + 1) triangular filters, equally spaced on the mel
// scale between low_freq and high_freq.
RowMatrix MelFilterbank(const FbankConfig& config);

// Number of frames produced for n samples; 0 when n < frame_length.
int NumFrames(long n_samples, const FbankConfig& config);

// Throws TooShort when the waveform has fewer than frame_length samples.
FeatureMatrix Fbank(const Waveform& wave, const FbankConfig& config);

// Utterance-level mean normalization of every column.
FeatureMatrix Cmn(const FeatureMatrix& features);

// Exactly target_frames rows: a uniformly random window when the input is
// long enough, otherwise the input repeated from its start and cut.
FeatureMatrix Crop(const FeatureMatrix& features, int target_frames, Rng& rng);

// Binary layout, little-endian: magic `FBK1`, u16 version (1), u32 frames,
// u32 dim, u32 frame_shift, frames x dim f32 row-major.
void WriteFeatures(const FeatureMatrix& features, const std::string& path);
FeatureMatrix ReadFeatures(const std::string& path);

}  // namespace sv

#endif  // SV_DSP_H_
