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

#include "sv/resunet.h"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Core>

#include "sv/error.h"
#include "sv/random.h"

namespace sv {

namespace {

Param MakeParam(std::string name, std::vector<int> shape, float fill,
                bool trainable = true) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return Param{std::move(name), std::move(shape), std::vector<float>(n, fill),
               trainable};
}

Conv2d MakeConv(const std::string& prefix, int in, int out, int kernel,
                int stride, bool transposed) {
  Conv2d conv;
  conv.in_channels = in;
  conv.out_channels = out;
  conv.kernel_h = conv.kernel_w = kernel;
  conv.stride = stride;
  conv.pad_h = conv.pad_w = kernel / 2;
  conv.transposed = transposed;
  conv.output_padding = transposed ? stride - 1 : 0;
  conv.weight = transposed
                    ? MakeParam(prefix + ".weight", {in, out, kernel, kernel}, 0)
                    : MakeParam(prefix + ".weight", {out, in, kernel, kernel}, 0);
  conv.bias = MakeParam(prefix + ".bias", {out}, 0);
  return conv;
}

BatchNorm MakeBn(const std::string& prefix, int channels) {
  BatchNorm bn;
  bn.gamma = MakeParam(prefix + ".gamma", {channels}, 1.0f);
  bn.beta = MakeParam(prefix + ".beta", {channels}, 0.0f);
  bn.running_mean = MakeParam(prefix + ".running_mean", {channels}, 0.0f, false);
  bn.running_var = MakeParam(prefix + ".running_var", {channels}, 1.0f, false);
  return bn;
}

SeBlock MakeSeBlock(const std::string& prefix, const LayerSpec& spec,
                    int reduction) {
  SeBlock block;
  const bool deconv = spec.kind == LayerKind::kSeDeconv;
  block.conv = MakeConv(prefix + (deconv ? ".deconv" : ".conv"),
                        spec.in_channels, spec.out_channels, spec.kernel_h,
                        spec.stride, deconv);
  block.bn = MakeBn(prefix + ".bn", spec.out_channels);
  const int c = spec.out_channels;
  const int hidden = std::max(1, c / reduction);
  block.se.fc1_weight = MakeParam(prefix + ".se.fc1.weight", {hidden, c}, 0);
  block.se.fc1_bias = MakeParam(prefix + ".se.fc1.bias", {hidden}, 0);
  block.se.fc2_weight = MakeParam(prefix + ".se.fc2.weight", {c, hidden}, 0);
  block.se.fc2_bias = MakeParam(prefix + ".se.fc2.bias", {c}, 0);
  return block;
}

std::vector<int> ShapeOf(const TensorCTF& t) {
  return {t.channels(), t.time(), t.freq()};
}

// Fan-in from dimension 1 of the weight, as in the usual Kaiming
// convention (for transposed convolutions that is the output channel).
int FanIn(const Param& p) {
  if (p.shape.size() == 4) return p.shape[1] * p.shape[2] * p.shape[3];
  return p.shape.back();
}

}  // namespace

void ResUnetConfig::Validate() const {
  if (residual_blocks < 1) {
    throw Error(ErrorKind::kConfig, "residual_blocks must be >= 1");
  }
  if (embed_dim < 1) throw Error(ErrorKind::kConfig, "embed_dim must be >= 1");
  if (base_channels < 1 || se_reduction < 1) {
    throw Error(ErrorKind::kConfig, "channels and se_reduction must be >= 1");
  }
  if (n_mels < 4 || n_mels % 4 != 0) {
    throw Error(ErrorKind::kConfig, "n_mels must be a positive multiple of 4");
  }
}

ResUnetConfig ResUnetConfig::Variant(int residual_blocks) {
  switch (residual_blocks) {
    case 9:
    case 12:
    case 15:
    case 18:
    case 21:
      break;
    default:
      throw Error(ErrorKind::kConfig,
                  "unknown ResUnet variant " + std::to_string(residual_blocks) +
                      " (expected 9, 12, 15, 18 or 21)");
  }
  ResUnetConfig c;
  c.residual_blocks = residual_blocks;
  return c;
}

std::vector<LayerSpec> LayerSpecs(const ResUnetConfig& config) {
  config.Validate();
  const int c1 = config.base_channels;
  const int c2 = 2 * c1;
  const int c3 = 4 * c1;
  std::vector<LayerSpec> specs = {
      {LayerKind::kSeConv, 7, 7, 1, 1, c1},
      {LayerKind::kSeConv, 3, 3, 2, c1, c2},
      {LayerKind::kSeConv, 3, 3, 2, c2, c3},
  };
  for (int i = 0; i < config.residual_blocks; ++i) {
    specs.push_back({LayerKind::kResidual, 3, 3, 1, c3, c3});
  }
  specs.push_back({LayerKind::kSeDeconv, 3, 3, 2, c3, c2});
  specs.push_back({LayerKind::kSeDeconv, 3, 3, 2, c2, c1});
  specs.push_back({LayerKind::kSeConv, 7, 7, 1, c1, c1});
  return specs;
}

long ResidualBlockParamCount(int channels) {
  const long conv = static_cast<long>(channels) * channels * 9 + channels;
  const long bn = 2L * channels;
  return 2 * (conv + bn);
}

long ParamCount(const ResUnetConfig& config) {
  long total = 0;
  for (const auto& s : LayerSpecs(config)) {
    if (s.kind == LayerKind::kResidual) {
      total += ResidualBlockParamCount(s.in_channels);
      continue;
    }
    const long c = s.out_channels;
    const long hidden = std::max(1, s.out_channels / config.se_reduction);
    total += static_cast<long>(s.in_channels) * c * s.kernel_h * s.kernel_w + c;
    total += 2 * c;
    total += hidden * c + hidden + c * hidden + c;
  }
  const long pooled = static_cast<long>(config.base_channels) * config.n_mels;
  total += pooled * config.embed_dim + config.embed_dim;
  return total;
}

ResUnet::ResUnet(const ResUnetConfig& config) : config_(config) {
  const auto specs = LayerSpecs(config);
  int down = 0, res = 0, up = 0;
  for (const auto& s : specs) {
    switch (s.kind) {
      case LayerKind::kResidual: {
        const std::string p = "res." + std::to_string(res++);
        ResidualBlock b;
        b.conv1 = MakeConv(p + ".conv1", s.in_channels, s.out_channels, 3, 1, false);
        b.bn1 = MakeBn(p + ".bn1", s.out_channels);
        b.conv2 = MakeConv(p + ".conv2", s.out_channels, s.out_channels, 3, 1, false);
        b.bn2 = MakeBn(p + ".bn2", s.out_channels);
        residual_.push_back(std::move(b));
        break;
      }
      case LayerKind::kSeConv:
        if (residual_.empty()) {
          down_.push_back(MakeSeBlock("down." + std::to_string(down++), s,
                                      config.se_reduction));
        } else {
          up_.push_back(MakeSeBlock("up." + std::to_string(up++), s,
                                    config.se_reduction));
        }
        break;
      case LayerKind::kSeDeconv:
        up_.push_back(MakeSeBlock("up." + std::to_string(up++), s,
                                  config.se_reduction));
        break;
    }
  }
  const int pooled = config.base_channels * config.n_mels;
  head_weight_ = MakeParam("head.weight", {config.embed_dim, pooled}, 0);
  head_bias_ = MakeParam("head.bias", {config.embed_dim}, 0);
}

ResUnet ResUnet::Build(const ResUnetConfig& config, std::uint64_t seed) {
  config.Validate();
  ResUnet net(config);
  Rng rng(seed);
  auto init = [&](Param& p) {
    const double bound = std::sqrt(6.0 / FanIn(p));
    std::uniform_real_distribution<float> dist(static_cast<float>(-bound),
                                               static_cast<float>(bound));
    for (float& v : p.values) v = dist(rng);
  };
  auto init_se_block = [&](SeBlock& b) {
    init(b.conv.weight);
    init(b.se.fc1_weight);
    init(b.se.fc2_weight);
  };
  for (auto& b : net.down_) init_se_block(b);
  for (auto& b : net.residual_) {
    init(b.conv1.weight);
    init(b.conv2.weight);
  }
  for (auto& b : net.up_) init_se_block(b);
  init(net.head_weight_);
  return net;
}

TensorCTF ResUnet::FrameLevel(const TensorCTF& input,
                              std::vector<LayerTrace>* trace) const {
  if (input.channels() != 1 || input.freq() != config_.n_mels) {
    throw Error(ErrorKind::kShape, "frame-level input must be 1 x T x " +
                                       std::to_string(config_.n_mels));
  }
  if (input.time() % 4 != 0) {
    throw Error(ErrorKind::kShape, "frame-level input T must be divisible by 4");
  }
  auto record = [&](const std::string& name, const TensorCTF& t) {
    if (trace) trace->push_back({name, ShapeOf(t)});
  };
  const TensorCTF d1 = SeBlockForward(input, down_[0]);
  record("se_conv_1", d1);
  const TensorCTF d2 = SeBlockForward(d1, down_[1]);
  record("se_conv_2", d2);
  const TensorCTF d3 = SeBlockForward(d2, down_[2]);
  record("se_conv_3", d3);
  TensorCTF r = d3;
  for (const auto& block : residual_) r = ResidualBlockForward(r, block);
  record("residual_x" + std::to_string(residual_.size()), r);
  // Skip connections: each upsampling block consumes the sum of the previous
  // output and the downsampling output of matching shape.
  r += d3;
  TensorCTF u = SeBlockForward(r, up_[0]);
  record("se_deconv_1", u);
  u += d2;
  u = SeBlockForward(u, up_[1]);
  record("se_deconv_2", u);
  u += d1;
  u = SeBlockForward(u, up_[2]);
  record("se_conv_out", u);
  return u;
}

std::vector<float> ResUnet::Pool(const TensorCTF& frame_map,
                                 int valid_frames) const {
  if (valid_frames == frame_map.time()) return Tsdp(frame_map);
  return Tsdp(frame_map.TruncateTime(valid_frames));
}

std::vector<float> ResUnet::Project(const std::vector<float>& pooled) const {
  const int in = head_weight_.shape[1];
  if (static_cast<int>(pooled.size()) != in) {
    throw Error(ErrorKind::kShape, "affine head expects " + std::to_string(in) +
                                       " inputs, got " +
                                       std::to_string(pooled.size()));
  }
  using FloatMatrix =
      Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const FloatMatrix> w(head_weight_.values.data(), config_.embed_dim,
                                  in);
  Eigen::Map<const Eigen::VectorXf> x(pooled.data(), in);
  Eigen::Map<const Eigen::VectorXf> b(head_bias_.values.data(),
                                      config_.embed_dim);
  const Eigen::VectorXf y = w * x + b;
  return {y.data(), y.data() + y.size()};
}

namespace {

TensorCTF PaddedInput(const FeatureMatrix& features, int n_mels) {
  if (features.dim() != n_mels) {
    throw Error(ErrorKind::kShape, "features have " +
                                       std::to_string(features.dim()) +
                                       " columns, expected " +
                                       std::to_string(n_mels));
  }
  const int t = features.num_frames();
  if (t < 4) {
    throw Error(ErrorKind::kShape,
                "need at least 4 frames, got " + std::to_string(t));
  }
  const int padded = (t + 3) / 4 * 4;
  TensorCTF input(1, padded, n_mels);
  for (int i = 0; i < t; ++i) {
    for (int m = 0; m < n_mels; ++m) {
      input.at(0, i, m) = static_cast<float>(features.frames(i, m));
    }
  }
  return input;
}

}  // namespace

std::vector<float> ResUnet::PooledFeatures(const FeatureMatrix& features) const {
  const TensorCTF input = PaddedInput(features, config_.n_mels);
  return Pool(FrameLevel(input), features.num_frames());
}

std::vector<float> ResUnet::Forward(const FeatureMatrix& features,
                                    std::vector<LayerTrace>* trace) const {
  const TensorCTF input = PaddedInput(features, config_.n_mels);
  const TensorCTF frame_map = FrameLevel(input, trace);
  const std::vector<float> pooled = Pool(frame_map, features.num_frames());
  if (trace) trace->push_back({"tsdp", {static_cast<int>(pooled.size())}});
  std::vector<float> embedding = Project(pooled);
  if (trace) trace->push_back({"affine", {static_cast<int>(embedding.size())}});
  return embedding;
}

std::vector<Param*> ResUnet::Parameters() {
  std::vector<Param*> out;
  auto add_se = [&](SeBlock& b) {
    out.insert(out.end(),
               {&b.conv.weight, &b.conv.bias, &b.bn.gamma, &b.bn.beta,
                &b.bn.running_mean, &b.bn.running_var, &b.se.fc1_weight,
                &b.se.fc1_bias, &b.se.fc2_weight, &b.se.fc2_bias});
  };
  for (auto& b : down_) add_se(b);
  for (auto& b : residual_) {
    out.insert(out.end(),
               {&b.conv1.weight, &b.conv1.bias, &b.bn1.gamma, &b.bn1.beta,
                &b.bn1.running_mean, &b.bn1.running_var, &b.conv2.weight,
                &b.conv2.bias, &b.bn2.gamma, &b.bn2.beta, &b.bn2.running_mean,
                &b.bn2.running_var});
  }
  for (auto& b : up_) add_se(b);
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

std::vector<const Param*> ResUnet::Parameters() const {
  auto params = const_cast<ResUnet*>(this)->Parameters();
  return {params.begin(), params.end()};
}

long ResUnet::TrainableParamCount() const {
  long total = 0;
  for (const Param* p : Parameters()) {
    if (p->trainable) total += static_cast<long>(p->values.size());
  }
  return total;
}

}  // namespace sv
