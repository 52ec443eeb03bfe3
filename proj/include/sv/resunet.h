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

#ifndef SV_RESUNET_H_
#define SV_RESUNET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sv/dsp.h"
#include "sv/tensor.h"

namespace sv {

struct ResUnetConfig {
  int residual_blocks = 15;
  int base_channels = 64;
  int embed_dim = 256;
  int n_mels = 64;
  int se_reduction = 8;

  // Throws ConfigError.
  void Validate() const;
  // Depths of the published variants: 9, 12, 15, 18, 21.
  static ResUnetConfig Variant(int residual_blocks);

  bool operator==(const ResUnetConfig&) const = default;
};

enum class LayerKind { kSeConv, kResidual, kSeDeconv };

struct LayerSpec {
  LayerKind kind;
  int kernel_h;
  int kernel_w;
  // 2 downsamples, 1 keeps the size; kSeDeconv always doubles.
  int stride;
  int in_channels;
  int out_channels;
};

// Block layout of the network in order: three downsampling SE conv blocks,
// `residual_blocks` residual blocks, two SE deconv blocks, one SE conv block.
std::vector<LayerSpec> LayerSpecs(const ResUnetConfig& config);

// Trainable parameters: conv weights and biases, batch-norm scale and shift,
// SE bottleneck weights and biases, affine head. Running statistics excluded.
long ParamCount(const ResUnetConfig& config);
long ResidualBlockParamCount(int channels);

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
  bool trainable = true;
};

struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;
  // Transposed convolutions store weights as [in][out][kh][kw] and produce
  // (n - 1) * stride - 2 * pad + kernel + output_padding outputs.
  bool transposed = false;
  int output_padding = 0;
  Param weight;
  Param bias;

  TensorCTF Forward(const TensorCTF& x) const;
  Shape3 OutputShape(const Shape3& in) const;
};

// Inference batch norm: per-channel affine with stored statistics.
struct BatchNorm {
  Param gamma;
  Param beta;
  Param running_mean;
  Param running_var;
  double eps = 1e-5;

  void ForwardInPlace(TensorCTF& x) const;
};

struct SqueezeExcite {
  Param fc1_weight;  // [channels / reduction][channels]
  Param fc1_bias;
  Param fc2_weight;  // [channels][channels / reduction]
  Param fc2_bias;

  // Per-channel multipliers in (0, 1).
  std::vector<float> Gates(const TensorCTF& x) const;
};

// conv (or transposed conv) -> batch norm -> ReLU -> SE recalibration.
struct SeBlock {
  Conv2d conv;
  BatchNorm bn;
  SqueezeExcite se;
};

// ReLU(BN(conv(ReLU(BN(conv(x))))) + x).
struct ResidualBlock {
  Conv2d conv1;
  BatchNorm bn1;
  Conv2d conv2;
  BatchNorm bn2;
};

TensorCTF SeBlockForward(const TensorCTF& x, const SeBlock& block);
TensorCTF ResidualBlockForward(const TensorCTF& x, const ResidualBlock& block);

// Population standard deviation over time of every (channel, frequency)
// cell, flattened channel-major. Throws DegenerateTime when t < 2.
std::vector<float> Tsdp(const TensorCTF& x);

struct LayerTrace {
  std::string name;
  std::vector<int> shape;
};

class ResUnet {
 public:
  // Kaiming-uniform weights from `seed`, zero biases, identity batch norm.
  static ResUnet Build(const ResUnetConfig& config, std::uint64_t seed);

  const ResUnetConfig& config() const { return config_; }

  // features: T x n_mels with T >= 4. The time axis is zero-padded to a
  // multiple of 4 internally and truncated back before pooling.
  std::vector<float> Forward(const FeatureMatrix& features,
                             std::vector<LayerTrace>* trace = nullptr) const;

  // The seven frame-level blocks with U-Net skip sums. The input must be
  // 1 x T x n_mels with T divisible by 4.
  TensorCTF FrameLevel(const TensorCTF& input,
                       std::vector<LayerTrace>* trace = nullptr) const;
  // TSDP over the first `valid_frames` frames.
  std::vector<float> Pool(const TensorCTF& frame_map, int valid_frames) const;
  std::vector<float> Project(const std::vector<float>& pooled) const;
  // Forward up to and including TSDP.
  std::vector<float> PooledFeatures(const FeatureMatrix& features) const;

  // Ordered parameter list, names unique; includes batch-norm statistics.
  std::vector<Param*> Parameters();
  std::vector<const Param*> Parameters() const;
  long TrainableParamCount() const;

  const std::vector<SeBlock>& down() const { return down_; }
  const std::vector<ResidualBlock>& residual() const { return residual_; }
  const std::vector<SeBlock>& up() const { return up_; }
  const Param& head_weight() const { return head_weight_; }
  const Param& head_bias() const { return head_bias_; }

 private:
  explicit ResUnet(const ResUnetConfig& config);

  ResUnetConfig config_;
  std::vector<SeBlock> down_;
  std::vector<ResidualBlock> residual_;
  std::vector<SeBlock> up_;
  Param head_weight_;  // [embed_dim][channels * n_mels]
  Param head_bias_;
};

// Little-endian: magic `RUN1`, u16 version, u32 depth, channels, embed_dim,
// se_reduction, then until EOF: u16 name length, name, u8 rank, u32 dims,
// f32 values.
void SaveCheckpoint(const ResUnet& network, const std::string& path);
// Throws FormatError on a bad header and CheckpointMismatch when the stored
// configuration or tensor shapes differ from `config`.
ResUnet LoadCheckpoint(const std::string& path, const ResUnetConfig& config);

}  // namespace sv

#endif  // SV_RESUNET_H_
