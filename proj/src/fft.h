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

#ifndef SV_SRC_FFT_H_
#define SV_SRC_FFT_H_

#include <complex>
#include <memory>
#include <vector>

namespace sv::internal {

// Real-input FFT of fixed size backed by FFTW. Instances are not shared
// between threads; construction and destruction are serialized internally
// because FFTW planning is not thread-safe.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }

  // in: size() reals; returns size()/2 + 1 bins.
  const std::vector<std::complex<double>>& Forward(const double* in);
  // in: size()/2 + 1 bins; returns size() reals, scaled by 1/size().
  const std::vector<double>& Inverse(const std::complex<double>* in);

 private:
  struct Plans;
  int size_;
  std::unique_ptr<Plans> plans_;
  std::vector<std::complex<double>> spectrum_;
  std::vector<double> signal_;
};

}  // namespace sv::internal

#endif  // SV_SRC_FFT_H_
