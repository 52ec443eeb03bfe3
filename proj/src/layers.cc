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
#include <vector>

#include <Eigen/Core>

#include "sv/error.h"
#include "sv/resunet.h"
#include "sv/tensor.h"

namespace sv {

namespace {

using FloatMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Bytes of im2col scratch per GEMM call.
constexpr std::size_t kIm2colBudget = 16u << 20;

std::string ShapeString(const Shape3& s) {
  return std::to_string(s.c) + "x" + std::to_string(s.t) + "x" +
         std::to_string(s.f);
}

// Stride-`stride` cross-correlation with zero padding, weights laid out
// [out][in][kh][kw].
TensorCTF Correlate(const TensorCTF& x, const float* weights,
                    const float* bias, int out_channels, int kh, int kw,
                    int stride, int pad_h, int pad_w) {
  const int cin = x.channels();
  const int h = x.time();
  const int w = x.freq();
  const int ho = (h + 2 * pad_h - kh) / stride + 1;
  const int wo = (w + 2 * pad_w - kw) / stride + 1;
  if (ho < 1 || wo < 1) {
    throw Error(ErrorKind::kShape, "convolution input " +
                                       ShapeString(x.shape()) +
                                       " smaller than kernel");
  }
  TensorCTF y(out_channels, ho, wo);
  const int k = cin * kh * kw;
  Eigen::Map<const FloatMatrix> wmat(weights, out_channels, k);
  Eigen::Map<FloatMatrix> ymat(y.data(), out_channels,
                               static_cast<Eigen::Index>(ho) * wo);
  const int rows_per_chunk = std::max<int>(
      1, static_cast<int>(kIm2colBudget / (sizeof(float) *
                                           static_cast<std::size_t>(k) * wo)));
  FloatMatrix cols;
  for (int t0 = 0; t0 < ho; t0 += rows_per_chunk) {
    const int nt = std::min(rows_per_chunk, ho - t0);
    const int ncols = nt * wo;
    cols.resize(k, ncols);
    for (int ci = 0; ci < cin; ++ci) {
      for (int a = 0; a < kh; ++a) {
        for (int b = 0; b < kw; ++b) {
          float* row = cols.data() +
                       static_cast<std::size_t>((ci * kh + a) * kw + b) * ncols;
          for (int tl = 0; tl < nt; ++tl) {
            const int ti = (t0 + tl) * stride - pad_h + a;
            float* dst = row + static_cast<std::size_t>(tl) * wo;
            if (ti < 0 || ti >= h) {
              std::fill(dst, dst + wo, 0.0f);
              continue;
            }
            for (int fo = 0; fo < wo; ++fo) {
              const int fi = fo * stride - pad_w + b;
              dst[fo] = (fi < 0 || fi >= w) ? 0.0f : x.at(ci, ti, fi);
            }
          }
        }
      }
    }
    ymat.middleCols(static_cast<Eigen::Index>(t0) * wo, ncols).noalias() =
        wmat * cols;
  }
  if (bias) {
    for (int o = 0; o < out_channels; ++o) {
      for (float& v : y.channel(o)) v += bias[o];
    }
  }
  return y;
}

void ReluInPlace(TensorCTF& x) {
  float* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = std::max(p[i], 0.0f);
}

}  // namespace

TensorCTF::TensorCTF(int c, int t, int f, float fill)
    : c_(c), t_(t), f_(f),
      data_(static_cast<std::size_t>(c) * t * f, fill) {
  if (c < 1 || t < 1 || f < 1) {
    throw Error(ErrorKind::kShape, "tensor dims must be >= 1");
  }
}

TensorCTF TensorCTF::TruncateTime(int frames) const {
  if (frames < 1 || frames > t_) {
    throw Error(ErrorKind::kShape, "cannot truncate to " +
                                       std::to_string(frames) + " frames");
  }
  TensorCTF out(c_, frames, f_);
  for (int c = 0; c < c_; ++c) {
    const auto src = channel(c);
    std::copy(src.begin(), src.begin() + static_cast<std::size_t>(frames) * f_,
              out.channel(c).begin());
  }
  return out;
}

TensorCTF TensorCTF::PadTime(int frames) const {
  if (frames < t_) {
    throw Error(ErrorKind::kShape, "cannot pad to fewer frames");
  }
  TensorCTF out(c_, frames, f_);
  for (int c = 0; c < c_; ++c) {
    const auto src = channel(c);
    std::copy(src.begin(), src.end(), out.channel(c).begin());
  }
  return out;
}

TensorCTF& TensorCTF::operator+=(const TensorCTF& other) {
  if (shape() != other.shape()) {
    throw Error(ErrorKind::kShape, "cannot add " + ShapeString(other.shape()) +
                                       " to " + ShapeString(shape()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Shape3 Conv2d::OutputShape(const Shape3& in) const {
  if (transposed) {
    return {out_channels,
            (in.t - 1) * stride - 2 * pad_h + kernel_h + output_padding,
            (in.f - 1) * stride - 2 * pad_w + kernel_w + output_padding};
  }
  return {out_channels, (in.t + 2 * pad_h - kernel_h) / stride + 1,
          (in.f + 2 * pad_w - kernel_w) / stride + 1};
}

TensorCTF Conv2d::Forward(const TensorCTF& x) const {
  if (x.channels() != in_channels) {
    throw Error(ErrorKind::kShape,
                "conv expects " + std::to_string(in_channels) +
                    " channels, got " + std::to_string(x.channels()));
  }
  const float* b = bias.values.empty() ? nullptr : bias.values.data();
  if (!transposed) {
    return Correlate(x, weight.values.data(), b, out_channels, kernel_h,
                     kernel_w, stride, pad_h, pad_w);
  }
  // A transposed convolution is a stride-1 correlation of the zero-dilated,
  // padded input with the spatially flipped, channel-swapped kernel.
  const Shape3 out = OutputShape(x.shape());
  const int lead_h = kernel_h - 1 - pad_h;
  const int lead_w = kernel_w - 1 - pad_w;
  if (lead_h < 0 || lead_w < 0) {
    throw Error(ErrorKind::kShape, "transposed conv padding exceeds kernel");
  }
  const int dh = out.t + kernel_h - 1;
  const int dw = out.f + kernel_w - 1;
  TensorCTF dilated(in_channels, dh, dw);
  for (int c = 0; c < in_channels; ++c) {
    for (int t = 0; t < x.time(); ++t) {
      for (int f = 0; f < x.freq(); ++f) {
        dilated.at(c, lead_h + t * stride, lead_w + f * stride) = x.at(c, t, f);
      }
    }
  }
  std::vector<float> flipped(weight.values.size());
  for (int i = 0; i < in_channels; ++i) {
    for (int o = 0; o < out_channels; ++o) {
      for (int a = 0; a < kernel_h; ++a) {
        for (int bb = 0; bb < kernel_w; ++bb) {
          const std::size_t src =
              ((static_cast<std::size_t>(i) * out_channels + o) * kernel_h + a) *
                  kernel_w + bb;
          const std::size_t dst =
              ((static_cast<std::size_t>(o) * in_channels + i) * kernel_h +
               (kernel_h - 1 - a)) * kernel_w + (kernel_w - 1 - bb);
          flipped[dst] = weight.values[src];
        }
      }
    }
  }
  return Correlate(dilated, flipped.data(), b, out_channels, kernel_h,
                   kernel_w, 1, 0, 0);
}

void BatchNorm::ForwardInPlace(TensorCTF& x) const {
  if (static_cast<int>(gamma.values.size()) != x.channels()) {
    throw Error(ErrorKind::kShape, "batch norm channel mismatch");
  }
  for (int c = 0; c < x.channels(); ++c) {
    const double scale =
        gamma.values[c] / std::sqrt(static_cast<double>(running_var.values[c]) + eps);
    const double shift = beta.values[c] - scale * running_mean.values[c];
    const auto s = static_cast<float>(scale);
    const auto b = static_cast<float>(shift);
    for (float& v : x.channel(c)) v = v * s + b;
  }
}

std::vector<float> SqueezeExcite::Gates(const TensorCTF& x) const {
  const int c = x.channels();
  const int hidden = static_cast<int>(fc1_bias.values.size());
  if (static_cast<int>(fc2_bias.values.size()) != c) {
    throw Error(ErrorKind::kShape, "SE channel mismatch");
  }
  std::vector<double> pooled(c);
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (float v : x.channel(ch)) acc += v;
    pooled[ch] = acc / static_cast<double>(x.time() * x.freq());
  }
  std::vector<double> h(hidden);
  for (int j = 0; j < hidden; ++j) {
    double acc = fc1_bias.values[j];
    for (int ch = 0; ch < c; ++ch) {
      acc += fc1_weight.values[static_cast<std::size_t>(j) * c + ch] * pooled[ch];
    }
    h[j] = std::max(acc, 0.0);
  }
  std::vector<float> gates(c);
  for (int ch = 0; ch < c; ++ch) {
    double acc = fc2_bias.values[ch];
    for (int j = 0; j < hidden; ++j) {
      acc += fc2_weight.values[static_cast<std::size_t>(ch) * hidden + j] * h[j];
    }
    gates[ch] = static_cast<float>(1.0 / (1.0 + std::exp(-acc)));
  }
  return gates;
}

TensorCTF SeBlockForward(const TensorCTF& x, const SeBlock& block) {
  TensorCTF y = block.conv.Forward(x);
  block.bn.ForwardInPlace(y);
  ReluInPlace(y);
  const std::vector<float> gates = block.se.Gates(y);
  for (int c = 0; c < y.channels(); ++c) {
    for (float& v : y.channel(c)) v *= gates[c];
  }
  return y;
}

TensorCTF ResidualBlockForward(const TensorCTF& x, const ResidualBlock& block) {
  TensorCTF y = block.conv1.Forward(x);
  block.bn1.ForwardInPlace(y);
  ReluInPlace(y);
  y = block.conv2.Forward(y);
  block.bn2.ForwardInPlace(y);
  if (y.shape() != x.shape()) {
    throw Error(ErrorKind::kShape, "residual block must preserve shape, got " +
                                       ShapeString(y.shape()) + " from " +
                                       ShapeString(x.shape()));
  }
  y += x;
  ReluInPlace(y);
  return y;
}

std::vector<float> Tsdp(const TensorCTF& x) {
  if (x.time() < 2) {
    throw Error(ErrorKind::kDegenerateTime,
                "temporal std pooling needs at least 2 frames");
  }
  const int t = x.time();
  const int f = x.freq();
  std::vector<float> out(static_cast<std::size_t>(x.channels()) * f);
  std::vector<double> mean(f), var(f);
  for (int c = 0; c < x.channels(); ++c) {
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(var.begin(), var.end(), 0.0);
    for (int ti = 0; ti < t; ++ti) {
      for (int fi = 0; fi < f; ++fi) mean[fi] += x.at(c, ti, fi);
    }
    for (int fi = 0; fi < f; ++fi) mean[fi] /= t;
    for (int ti = 0; ti < t; ++ti) {
      for (int fi = 0; fi < f; ++fi) {
        const double d = x.at(c, ti, fi) - mean[fi];
        var[fi] += d * d;
      }
    }
    for (int fi = 0; fi < f; ++fi) {
      out[static_cast<std::size_t>(c) * f + fi] =
          static_cast<float>(std::sqrt(var[fi] / t));
    }
  }
  return out;
}

}  // namespace sv
