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

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

#include "binary_io.h"
#include "fft.h"
#include "sv/dsp.h"
#include "sv/error.h"

namespace sv {

namespace {

std::vector<double> MakeWindow(WindowType type, int length) {
  std::vector<double> w(length, 1.0);
  if (length == 1) return w;
  const double a = 2.0 * std::numbers::pi / (length - 1);
  for (int i = 0; i < length; ++i) {
    switch (type) {
      case WindowType::kHamming:
        w[i] = 0.54 - 0.46 * std::cos(a * i);
        break;
      case WindowType::kHanning:
        w[i] = 0.5 - 0.5 * std::cos(a * i);
        break;
      case WindowType::kRectangular:
        break;
    }
  }
  return w;
}

}  // namespace

void FbankConfig::Validate() const {
  if (sample_rate <= 0 || n_mels <= 0 || frame_length <= 0 ||
      frame_shift <= 0 || fft_size <= 0) {
    throw Error(ErrorKind::kConfig, "fbank sizes must be positive");
  }
  if (frame_length > fft_size) {
    throw Error(ErrorKind::kConfig, "frame_length exceeds fft_size");
  }
  if (!(floor > 0.0)) throw Error(ErrorKind::kConfig, "log floor must be > 0");
  if (!(low_freq >= 0.0 && low_freq < high_freq &&
        high_freq <= sample_rate / 2.0)) {
    throw Error(ErrorKind::kConfig, "invalid mel frequency range");
  }
  if (dither < 0.0) throw Error(ErrorKind::kConfig, "dither must be >= 0");
}

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

double MelToHz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

RowMatrix MelFilterbank(const FbankConfig& config) {
  const int bins = config.fft_size / 2 + 1;
  RowMatrix fb = RowMatrix::Zero(config.n_mels, bins);
  const double mel_low = HzToMel(config.low_freq);
  const double mel_high = HzToMel(config.high_freq);
  const double delta = (mel_high - mel_low) / (config.n_mels + 1);
  for (int m = 0; m < config.n_mels; ++m) {
    const double left = mel_low + m * delta;
    const double center = left + delta;
    const double right = center + delta;
    for (int k = 0; k < bins; ++k) {
      const double mel =
          HzToMel(static_cast<double>(k) * config.sample_rate / config.fft_size);
      if (mel > left && mel <= center) {
        fb(m, k) = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        fb(m, k) = (right - mel) / (right - center);
      }
    }
  }
  return fb;
}

int NumFrames(long n_samples, const FbankConfig& config) {
  if (n_samples < config.frame_length) return 0;
  return static_cast<int>((n_samples - config.frame_length) /
                          config.frame_shift) +
         1;
}

FeatureMatrix Fbank(const Waveform& wave, const FbankConfig& config) {
  config.Validate();
  if (wave.sample_rate != config.sample_rate) {
    throw Error(ErrorKind::kUnsupportedFormat,
                "waveform sample rate " + std::to_string(wave.sample_rate) +
                    " != " + std::to_string(config.sample_rate));
  }
  const int frames =
      NumFrames(static_cast<long>(wave.samples.size()), config);
  if (frames < 1) {
    throw Error(ErrorKind::kTooShort,
                std::to_string(wave.samples.size()) +
                    " samples is shorter than one frame");
  }
  const RowMatrix filters = MelFilterbank(config);
  const std::vector<double> window =
      MakeWindow(config.window, config.frame_length);
  internal::RealFft fft(config.fft_size);
  std::vector<double> buf(config.fft_size, 0.0);
  Eigen::VectorXd power(config.fft_size / 2 + 1);
  Rng rng(config.dither_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  FeatureMatrix out;
  out.frame_shift = config.frame_shift;
  out.frames.resize(frames, config.n_mels);
  for (int t = 0; t < frames; ++t) {
    const float* x = wave.samples.data() +
                     static_cast<std::size_t>(t) * config.frame_shift;
    for (int i = 0; i < config.frame_length; ++i) {
      double v = x[i];
      if (config.dither > 0.0) v += config.dither * gauss(rng);
      buf[i] = v * window[i];
    }
    const auto& spec = fft.Forward(buf.data());
    for (int k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
    const Eigen::VectorXd energies = filters * power;
    for (int m = 0; m < config.n_mels; ++m) {
      out.frames(t, m) = std::log(std::max(config.floor, energies[m]));
    }
  }
  return out;
}

FeatureMatrix Cmn(const FeatureMatrix& features) {
  FeatureMatrix out = features;
  const Eigen::RowVectorXd mean = features.frames.colwise().mean();
  out.frames.rowwise() -= mean;
  return out;
}

FeatureMatrix Crop(const FeatureMatrix& features, int target_frames,
                   Rng& rng) {
  if (target_frames < 1) {
    throw Error(ErrorKind::kConfig, "crop target must be >= 1 frame");
  }
  const int frames = features.num_frames();
  if (frames < 1) throw Error(ErrorKind::kShape, "cannot crop empty features");
  FeatureMatrix out;
  out.frame_shift = features.frame_shift;
  if (frames >= target_frames) {
    std::uniform_int_distribution<int> offset_dist(0, frames - target_frames);
    const int offset = offset_dist(rng);
    out.frames = features.frames.middleRows(offset, target_frames);
    return out;
  }
  out.frames.resize(target_frames, features.dim());
  for (int t = 0; t < target_frames; ++t) {
    out.frames.row(t) = features.frames.row(t % frames);
  }
  return out;
}

namespace {
constexpr char kFeatureMagic[4] = {'F', 'B', 'K', '1'};
}  // namespace

void WriteFeatures(const FeatureMatrix& features, const std::string& path) {
  auto os = internal::OpenForWrite(path, true);
  os.write(kFeatureMagic, 4);
  internal::PutLe<std::uint16_t>(os, 1);
  internal::PutLe<std::uint32_t>(os, features.num_frames());
  internal::PutLe<std::uint32_t>(os, features.dim());
  internal::PutLe<std::uint32_t>(os, features.frame_shift);
  for (int t = 0; t < features.num_frames(); ++t) {
    for (int d = 0; d < features.dim(); ++d) {
      internal::PutLe<float>(os, static_cast<float>(features.frames(t, d)));
    }
  }
  internal::FinishWrite(os, path);
}

FeatureMatrix ReadFeatures(const std::string& path) {
  auto is = internal::OpenForRead(path, true);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kFeatureMagic, 4) != 0) {
    throw Error(ErrorKind::kFormat, "bad feature magic in " + path);
  }
  std::uint16_t version = 0;
  std::uint32_t frames = 0, dim = 0, shift = 0;
  if (!internal::GetLe(is, &version) || version != 1 ||
      !internal::GetLe(is, &frames) || !internal::GetLe(is, &dim) ||
      !internal::GetLe(is, &shift) || frames == 0 || dim == 0) {
    throw Error(ErrorKind::kFormat, "bad feature header in " + path);
  }
  FeatureMatrix out;
  out.frame_shift = static_cast<int>(shift);
  out.frames.resize(frames, dim);
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t d = 0; d < dim; ++d) {
      float v = 0.0f;
      if (!internal::GetLe(is, &v)) {
        throw Error(ErrorKind::kCorruptFile, path + ": truncated features");
      }
      out.frames(t, d) = v;
    }
  }
  return out;
}

}  // namespace sv
