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
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "sv/resunet.h"
#include "test_util.h"

namespace sv {
namespace {

using testing::ThrownKind;

ResUnetConfig Tiny(int depth = 2) {
  ResUnetConfig c;
  c.residual_blocks = depth;
  c.base_channels = 4;
  c.embed_dim = 8;
  c.n_mels = 16;
  c.se_reduction = 2;
  return c;
}

TensorCTF RandomTensor(int c, int t, int f, Rng& rng) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  TensorCTF x(c, t, f);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

Param RandomParam(std::vector<int> shape, Rng& rng) {
  std::size_t n = 1;
  for (int d : shape) n *= d;
  Param p{"p", shape, std::vector<float>(n), true};
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (float& v : p.values) v = g(rng);
  return p;
}

// Perturbs every parameter so that batch norm and biases are not identities.
void Scramble(ResUnet& net, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<float> u(0.5f, 1.5f);
  std::normal_distribution<float> g(0.0f, 0.05f);
  for (Param* p : net.Parameters()) {
    const bool positive = p->name.find("running_var") != std::string::npos ||
                          p->name.find("gamma") != std::string::npos;
    for (float& v : p->values) v = positive ? u(rng) : v + g(rng);
  }
}

FeatureMatrix RandomFeatures(int frames, int dim, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix f;
  f.frames = testing::GaussianMatrix(frames, dim, rng);
  return f;
}

TEST_CASE("strided convolution matches a direct sum") {
  Rng rng(1);
  Conv2d conv;
  conv.in_channels = 3;
  conv.out_channels = 2;
  conv.kernel_h = conv.kernel_w = 3;
  conv.stride = 2;
  conv.pad_h = conv.pad_w = 1;
  conv.weight = RandomParam({2, 3, 3, 3}, rng);
  conv.bias = RandomParam({2}, rng);
  const TensorCTF x = RandomTensor(3, 9, 8, rng);
  const TensorCTF y = conv.Forward(x);
  REQUIRE(y.shape() == Shape3{2, 5, 4});
  REQUIRE(conv.OutputShape(x.shape()) == y.shape());
  for (int o = 0; o < 2; ++o) {
    for (int t = 0; t < 5; ++t) {
      for (int f = 0; f < 4; ++f) {
        double acc = conv.bias.values[o];
        for (int i = 0; i < 3; ++i) {
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              const int ti = 2 * t - 1 + a, fi = 2 * f - 1 + b;
              if (ti < 0 || ti >= 9 || fi < 0 || fi >= 8) continue;
              acc += double(x.at(i, ti, fi)) *
                     conv.weight.values[((o * 3 + i) * 3 + a) * 3 + b];
            }
          }
        }
        CHECK(y.at(o, t, f) == doctest::Approx(acc).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("transposed convolution matches the scatter definition") {
  Rng rng(2);
  Conv2d conv;
  conv.in_channels = 3;
  conv.out_channels = 2;
  conv.kernel_h = conv.kernel_w = 3;
  conv.stride = 2;
  conv.pad_h = conv.pad_w = 1;
  conv.output_padding = 1;
  conv.transposed = true;
  conv.weight = RandomParam({3, 2, 3, 3}, rng);
  conv.bias = RandomParam({2}, rng);
  const TensorCTF x = RandomTensor(3, 5, 4, rng);
  const TensorCTF y = conv.Forward(x);
  REQUIRE(y.shape() == Shape3{2, 10, 8});

  std::vector<double> oracle(2 * 10 * 8, 0.0);
  for (int o = 0; o < 2; ++o) {
    for (int k = 0; k < 80; ++k) oracle[o * 80 + k] = conv.bias.values[o];
  }
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t < 5; ++t) {
      for (int f = 0; f < 4; ++f) {
        for (int o = 0; o < 2; ++o) {
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              const int to = 2 * t - 1 + a, fo = 2 * f - 1 + b;
              if (to < 0 || to >= 10 || fo < 0 || fo >= 8) continue;
              oracle[(o * 10 + to) * 8 + fo] +=
                  double(x.at(i, t, f)) *
                  conv.weight.values[((i * 2 + o) * 3 + a) * 3 + b];
            }
          }
        }
      }
    }
  }
  for (int o = 0; o < 2; ++o) {
    for (int t = 0; t < 10; ++t) {
      for (int f = 0; f < 8; ++f) {
        CHECK(y.at(o, t, f) ==
              doctest::Approx(oracle[(o * 10 + t) * 8 + f]).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("a 1x1 convolution is a channel mix") {
  Conv2d conv;
  conv.in_channels = 2;
  conv.out_channels = 1;
  conv.kernel_h = conv.kernel_w = 1;
  conv.weight = {"w", {1, 2, 1, 1}, {2.0f, -1.0f}, true};
  conv.bias = {"b", {1}, {0.5f}, true};
  TensorCTF x(2, 2, 2);
  for (int t = 0; t < 2; ++t) {
    for (int f = 0; f < 2; ++f) {
      x.at(0, t, f) = float(t + f);
      x.at(1, t, f) = float(3 * t - f);
    }
  }
  const TensorCTF y = conv.Forward(x);
  for (int t = 0; t < 2; ++t) {
    for (int f = 0; f < 2; ++f) {
      CHECK(y.at(0, t, f) == 2.0f * (t + f) - (3 * t - f) + 0.5f);
    }
  }
}

TEST_CASE("temporal standard deviation pooling") {
  TensorCTF x(2, 4, 1);
  const float a[] = {1, 2, 3, 4}, b[] = {5, 5, 5, 5};
  for (int t = 0; t < 4; ++t) {
    x.at(0, t, 0) = a[t];
    x.at(1, t, 0) = b[t];
  }
  const auto s = Tsdp(x);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(s[1] == 0.0f);
  CHECK(ThrownKind([] { Tsdp(TensorCTF(1, 1, 4)); }) ==
        ErrorKind::kDegenerateTime);
}

TEST_CASE("squeeze-excite gates lie in (0, 1)") {
  const ResUnet net = ResUnet::Build(Tiny(), 3);
  Rng rng(3);
  const auto gates = net.down()[1].se.Gates(RandomTensor(8, 4, 8, rng));
  REQUIRE(gates.size() == 8);
  for (float g : gates) {
    CHECK(g > 0.0f);
    CHECK(g < 1.0f);
  }
}

TEST_CASE("layer trace shapes follow the U-Net geometry") {
  const ResUnetConfig c = Tiny(3);
  const ResUnet net = ResUnet::Build(c, 1);
  std::vector<LayerTrace> trace;
  const auto emb = net.Forward(RandomFeatures(40, 16, 1), &trace);
  const std::vector<std::vector<int>> expected = {
      {4, 40, 16}, {8, 20, 8}, {16, 10, 4}, {16, 10, 4},
      {8, 20, 8},  {4, 40, 16}, {4, 40, 16}, {64}, {8}};
  REQUIRE(trace.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(trace[i].shape == expected[i]);
  }
  CHECK(trace[3].name == "residual_x3");
  CHECK(emb.size() == 8);
}

TEST_CASE("odd frame counts are padded internally") {
  const ResUnet net = ResUnet::Build(Tiny(), 1);
  const auto emb = net.Forward(RandomFeatures(37, 16, 2));
  CHECK(emb.size() == 8);
  for (float v : emb) CHECK(std::isfinite(v));
  CHECK(ThrownKind([&] { net.Forward(RandomFeatures(3, 16, 2)); }) ==
        ErrorKind::kShape);
  CHECK(ThrownKind([&] { net.Forward(RandomFeatures(40, 12, 2)); }) ==
        ErrorKind::kShape);
}

TEST_CASE("variants differ only in residual depth") {
  const auto strip = [](const ResUnetConfig& c) {
    std::vector<std::vector<int>> out;
    for (const auto& s : LayerSpecs(c)) {
      if (s.kind == LayerKind::kResidual) continue;
      out.push_back({int(s.kind), s.kernel_h, s.kernel_w, s.stride,
                     s.in_channels, s.out_channels});
    }
    return out;
  };
  const auto base = strip(ResUnetConfig::Variant(15));
  for (int depth : {9, 12, 18, 21}) {
    const ResUnetConfig c = ResUnetConfig::Variant(depth);
    CHECK(strip(c) == base);
    long residual = 0;
    for (const auto& s : LayerSpecs(c)) residual += s.kind == LayerKind::kResidual;
    CHECK(residual == depth);
    CHECK(ParamCount(c) - ParamCount(ResUnetConfig::Variant(15)) ==
          (depth - 15) * ResidualBlockParamCount(256));
  }
  CHECK(ThrownKind([] { ResUnetConfig::Variant(10); }) == ErrorKind::kConfig);
}

TEST_CASE("parameter count agrees with the built network") {
  for (const ResUnetConfig& c : {Tiny(1), Tiny(4), ResUnetConfig::Variant(9)}) {
    const ResUnet net = ResUnet::Build(c, 0);
    long total = 0;
    std::set<std::string> names;
    for (const Param* p : net.Parameters()) {
      CHECK(names.insert(p->name).second);
      long size = 1;
      for (int d : p->shape) size *= d;
      CHECK(size == long(p->values.size()));
      if (p->trainable) total += size;
    }
    CHECK(total == ParamCount(c));
    CHECK(net.TrainableParamCount() == ParamCount(c));
  }
  // 3x3 conv with bias plus batch-norm scale and shift, twice.
  CHECK(ResidualBlockParamCount(256) == 2 * (256 * 256 * 9 + 256 + 512));
}

TEST_CASE("build is deterministic per seed") {
  const ResUnet a = ResUnet::Build(Tiny(), 5);
  const ResUnet b = ResUnet::Build(Tiny(), 5);
  const ResUnet c = ResUnet::Build(Tiny(), 6);
  const FeatureMatrix f = RandomFeatures(24, 16, 3);
  CHECK(a.Forward(f) == b.Forward(f));
  CHECK(a.Forward(f) != c.Forward(f));
}

TEST_CASE("checkpoints round trip bit-exactly") {
  testing::TempDir dir;
  ResUnet net = ResUnet::Build(Tiny(), 7);
  Scramble(net, 8);
  SaveCheckpoint(net, dir.File("a.ckpt"));
  const ResUnet loaded = LoadCheckpoint(dir.File("a.ckpt"), Tiny());
  const auto pa = net.Parameters();
  const auto pb = loaded.Parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(pa[i]->values == pb[i]->values);
  }
  const FeatureMatrix f = RandomFeatures(32, 16, 4);
  CHECK(net.Forward(f) == loaded.Forward(f));
  SaveCheckpoint(loaded, dir.File("b.ckpt"));
  CHECK(testing::ReadFile(dir.File("a.ckpt")) ==
        testing::ReadFile(dir.File("b.ckpt")));
}

TEST_CASE("checkpoint mismatches are reported") {
  testing::TempDir dir;
  SaveCheckpoint(ResUnet::Build(Tiny(2), 1), dir.File("a.ckpt"));
  CHECK(ThrownKind([&] { LoadCheckpoint(dir.File("a.ckpt"), Tiny(3)); }) ==
        ErrorKind::kCheckpointMismatch);
  ResUnetConfig wider = Tiny(2);
  wider.base_channels = 8;
  CHECK(ThrownKind([&] { LoadCheckpoint(dir.File("a.ckpt"), wider); }) ==
        ErrorKind::kCheckpointMismatch);
  std::string bytes = testing::ReadFile(dir.File("a.ckpt"));
  bytes[1] = '?';
  testing::WriteFile(dir.File("bad.ckpt"), bytes);
  CHECK(ThrownKind([&] { LoadCheckpoint(dir.File("bad.ckpt"), Tiny(2)); }) ==
        ErrorKind::kFormat);
  CHECK(ThrownKind([&] { LoadCheckpoint(dir.File("none.ckpt"), Tiny(2)); }) ==
        ErrorKind::kIo);
}

}  // namespace
}  // namespace sv
