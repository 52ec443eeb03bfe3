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

#ifndef SV_TESTS_TEST_UTIL_H_
#define SV_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sv/corpus_io.h"
#include "sv/error.h"
#include "sv/matrix.h"
#include "sv/random.h"

namespace sv::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "sv_test_XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string File(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

inline std::string ReadFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

// Kind of the sv::Error thrown by fn, or nullopt when nothing is thrown.
template <typename Fn>
std::optional<ErrorKind> ThrownKind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline RowMatrix GaussianMatrix(int rows, int cols, Rng& rng,
                                double stddev = 1.0) {
  std::normal_distribution<double> g(0.0, stddev);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline Waveform Tone(double hz, double seconds, double amplitude = 0.5,
                     int sample_rate = 16000) {
  Waveform w;
  w.sample_rate = sample_rate;
  const int n = static_cast<int>(seconds * sample_rate);
  w.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(
        amplitude * std::sin(2.0 * 3.14159265358979323846 * hz * i / sample_rate));
  }
  return w;
}

inline Waveform NoiseWave(double seconds, std::uint64_t seed,
                          double amplitude = 0.1) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Waveform w;
  w.samples.resize(static_cast<std::size_t>(seconds * 16000));
  for (auto& s : w.samples) s = static_cast<float>(u(rng));
  return w;
}

}  // namespace sv::testing

#endif  // SV_TESTS_TEST_UTIL_H_
