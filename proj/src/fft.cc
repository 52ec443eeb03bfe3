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

#include "fft.h"

#include <algorithm>
#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace sv::internal {

namespace {
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Plans {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(int size)
    : size_(size),
      plans_(std::make_unique<Plans>()),
      spectrum_(size / 2 + 1),
      signal_(size) {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  plans_->real = fftw_alloc_real(size);
  plans_->cplx = fftw_alloc_complex(size / 2 + 1);
  plans_->forward = fftw_plan_dft_r2c_1d(size, plans_->real, plans_->cplx,
                                         FFTW_ESTIMATE);
  plans_->inverse = fftw_plan_dft_c2r_1d(size, plans_->cplx, plans_->real,
                                         FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->inverse);
  fftw_free(plans_->real);
  fftw_free(plans_->cplx);
}

const std::vector<std::complex<double>>& RealFft::Forward(const double* in) {
  std::copy(in, in + size_, plans_->real);
  fftw_execute(plans_->forward);
  for (int k = 0; k <= size_ / 2; ++k) {
    spectrum_[k] = {plans_->cplx[k][0], plans_->cplx[k][1]};
  }
  return spectrum_;
}

const std::vector<double>& RealFft::Inverse(const std::complex<double>* in) {
  for (int k = 0; k <= size_ / 2; ++k) {
    plans_->cplx[k][0] = in[k].real();
    plans_->cplx[k][1] = in[k].imag();
  }
  // c2r destroys its input, which is our private buffer.
  fftw_execute(plans_->inverse);
  const double scale = 1.0 / size_;
  for (int i = 0; i < size_; ++i) signal_[i] = plans_->real[i] * scale;
  return signal_;
}

}  // namespace sv::internal
