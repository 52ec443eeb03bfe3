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

#ifndef SV_TENSOR_H_
#define SV_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace sv {

struct Shape3 {
  int c = 0;
  int t = 0;
  int f = 0;

  bool operator==(const Shape3&) const = default;
};

// Rank-3 single-precision tensor laid out channel-major, then time, then
// frequency.
class TensorCTF {
 public:
  TensorCTF() = default;
  TensorCTF(int c, int t, int f, float fill = 0.0f);

  int channels() const { return c_; }
  int time() const { return t_; }
  int freq() const { return f_; }
  Shape3 shape() const { return {c_, t_, f_}; }
  std::size_t size() const { return data_.size(); }

  float& at(int c, int t, int f) {
    return data_[(static_cast<std::size_t>(c) * t_ + t) * f_ + f];
  }
  float at(int c, int t, int f) const {
    return data_[(static_cast<std::size_t>(c) * t_ + t) * f_ + f];
  }
  std::span<float> channel(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * t_ * f_,
            static_cast<std::size_t>(t_) * f_};
  }
  std::span<const float> channel(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * t_ * f_,
            static_cast<std::size_t>(t_) * f_};
  }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  const std::vector<float>& values() const { return data_; }

  // First `frames` time steps of every channel.
  TensorCTF TruncateTime(int frames) const;
  // Appends zero frames up to `frames` time steps.
  TensorCTF PadTime(int frames) const;

  TensorCTF& operator+=(const TensorCTF& other);

 private:
  int c_ = 0, t_ = 0, f_ = 0;
  std::vector<float> data_;
};

}  // namespace sv

#endif  // SV_TENSOR_H_
