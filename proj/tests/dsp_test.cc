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
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sv/dsp.h"
#include "test_util.h"

namespace sv {
namespace {

using testing::ThrownKind;

// Power spectrum of one Hamming-windowed frame by a direct O(N^2) DFT.
std::vector<double> NaivePowerSpectrum(const std::vector<float>& samples,
                                       int offset, int frame, int nfft) {
  std::vector<double> x(nfft, 0.0);
  for (int i = 0; i < frame; ++i) {
    const double w =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (frame - 1));
    x[i] = samples[offset + i] * w;
  }
  std::vector<double> power(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < nfft; ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / nfft);
    }
    power[k] = std::norm(acc);
  }
  return power;
}

double Mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

// Triangle weight of filter m at a given mel value.
double Triangle(int m, double mel, double lo, double hi, int n_mels) {
  const double step = (hi - lo) / (n_mels + 1);
  const double left = lo + m * step, center = left + step, right = center + step;
  if (mel > left && mel <= center) return (mel - left) / step;
  if (mel > center && mel < right) return (right - mel) / step;
  return 0.0;
}

std::vector<double> OracleFrame(const std::vector<float>& samples, int offset,
                                const FbankConfig& c) {
  const auto power =
      NaivePowerSpectrum(samples, offset, c.frame_length, c.fft_size);
  const double lo = Mel(c.low_freq), hi = Mel(c.high_freq);
  std::vector<double> out(c.n_mels);
  for (int m = 0; m < c.n_mels; ++m) {
    double e = 0.0;
    for (int k = 0; k <= c.fft_size / 2; ++k) {
      e += Triangle(m, Mel(k * double(c.sample_rate) / c.fft_size), lo, hi,
                    c.n_mels) *
           power[k];
    }
    out[m] = std::log(std::max(c.floor, e));
  }
  return out;
}

TEST_CASE("mel scale round trip") {
  for (double hz : {0.0, 20.0, 700.0, 1000.0, 7600.0}) {
    CHECK(MelToHz(HzToMel(hz)) == doctest::Approx(hz).epsilon(1e-12));
  }
  CHECK(HzToMel(700.0) == doctest::Approx(1127.0 * std::log(2.0)));
}

TEST_CASE("frame count follows the 25/10 ms geometry") {
  FbankConfig c;
  CHECK(NumFrames(399, c) == 0);
  CHECK(NumFrames(400, c) == 1);
  CHECK(NumFrames(559, c) == 1);
  CHECK(NumFrames(560, c) == 2);
  CHECK(NumFrames(16000, c) == 98);
  CHECK(NumFrames(32000, c) == 198);
}

TEST_CASE("fbank matches a direct DFT and mel oracle") {
  FbankConfig c;
  const Waveform noise = testing::NoiseWave(0.05, 11, 0.3);
  const FeatureMatrix f = Fbank(noise, c);
  REQUIRE(f.num_frames() == NumFrames(noise.samples.size(), c));
  REQUIRE(f.dim() == 64);
  for (int t : {0, 1, f.num_frames() - 1}) {
    const auto oracle = OracleFrame(noise.samples, t * c.frame_shift, c);
    for (int m = 0; m < c.n_mels; ++m) {
      CHECK(f.frames(t, m) == doctest::Approx(oracle[m]).epsilon(1e-9));
    }
  }
}

TEST_CASE("a pure tone peaks in the filter centered nearest to it") {
  FbankConfig c;
  const double lo = Mel(c.low_freq), hi = Mel(c.high_freq);
  const double step = (hi - lo) / (c.n_mels + 1);
  for (double hz : {500.0, 1000.0, 3000.0}) {
    const FeatureMatrix f = Fbank(testing::Tone(hz, 0.5), c);
    int nearest = 0;
    for (int m = 1; m < c.n_mels; ++m) {
      if (std::abs(lo + (m + 1) * step - Mel(hz)) <
          std::abs(lo + (nearest + 1) * step - Mel(hz))) {
        nearest = m;
      }
    }
    Eigen::Index peak;
    f.frames.row(10).maxCoeff(&peak);
    CHECK(peak == nearest);
  }
}

TEST_CASE("silence is floored") {
  FbankConfig c;
  Waveform zero;
  zero.samples.assign(1600, 0.0f);
  const FeatureMatrix f = Fbank(zero, c);
  CHECK((f.frames.array() == std::log(c.floor)).all());
}

TEST_CASE("dither is deterministic per seed") {
  FbankConfig c;
  c.dither = 1e-3;
  c.dither_seed = 5;
  const Waveform w = testing::Tone(440.0, 0.1);
  CHECK(Fbank(w, c).frames == Fbank(w, c).frames);
  FbankConfig d = c;
  d.dither_seed = 6;
  CHECK(Fbank(w, c).frames != Fbank(w, d).frames);
}

TEST_CASE("fbank errors") {
  FbankConfig c;
  Waveform short_wave;
  short_wave.samples.assign(399, 0.1f);
  CHECK(ThrownKind([&] { Fbank(short_wave, c); }) == ErrorKind::kTooShort);
  Waveform slow = testing::Tone(440.0, 0.1);
  slow.sample_rate = 8000;
  CHECK(ThrownKind([&] { Fbank(slow, c); }) == ErrorKind::kUnsupportedFormat);
  FbankConfig bad = c;
  bad.high_freq = 9000.0;
  CHECK(ThrownKind([&] { bad.Validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("cmn removes the column means") {
  Rng rng(3);
  FeatureMatrix f;
  f.frames = testing::GaussianMatrix(50, 8, rng).array() + 4.0;
  const FeatureMatrix n = Cmn(f);
  CHECK(n.frames.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(((f.frames - n.frames).rowwise() - (f.frames - n.frames).row(0))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("crop windows and repeat-padding") {
  FeatureMatrix f;
  f.frames.resize(10, 2);
  for (int t = 0; t < 10; ++t) f.frames.row(t) << t, -t;
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMatrix c = Crop(f, 4, rng);
    REQUIRE(c.num_frames() == 4);
    const int start = static_cast<int>(c.frames(0, 0));
    for (int t = 0; t < 4; ++t) CHECK(c.frames(t, 0) == start + t);
  }
  const FeatureMatrix padded = Crop(f, 25, rng);
  REQUIRE(padded.num_frames() == 25);
  for (int t = 0; t < 25; ++t) CHECK(padded.frames(t, 0) == t % 10);
  CHECK(Crop(f, 10, rng).frames == f.frames);
  CHECK(ThrownKind([&] { Crop(f, 0, rng); }) == ErrorKind::kConfig);
}

TEST_CASE("feature files round trip at single precision") {
  testing::TempDir dir;
  Rng rng(9);
  FeatureMatrix f;
  f.frames = testing::GaussianMatrix(7, 64, rng);
  f.frames = f.frames.cast<float>().cast<double>();
  f.frame_shift = 160;
  WriteFeatures(f, dir.File("a.fbk"));
  const FeatureMatrix g = ReadFeatures(dir.File("a.fbk"));
  CHECK(g.frames == f.frames);
  CHECK(g.frame_shift == 160);

  std::string bytes = testing::ReadFile(dir.File("a.fbk"));
  testing::WriteFile(dir.File("short.fbk"), bytes.substr(0, bytes.size() - 3));
  CHECK(ThrownKind([&] { ReadFeatures(dir.File("short.fbk")); }) ==
        ErrorKind::kCorruptFile);
  bytes[0] = 'X';
  testing::WriteFile(dir.File("bad.fbk"), bytes);
  CHECK(ThrownKind([&] { ReadFeatures(dir.File("bad.fbk")); }) ==
        ErrorKind::kFormat);
  CHECK(ThrownKind([&] { ReadFeatures(dir.File("none.fbk")); }) ==
        ErrorKind::kIo);
}

}  // namespace
}  // namespace sv
