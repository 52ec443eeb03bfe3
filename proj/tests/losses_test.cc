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
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "sv/losses.h"

namespace sv {
namespace {

using testing::ThrownKind;

TEST_CASE("aam-softmax value for a single embedding") {
  ClassifierHead head;
  head.num_classes = 2;
  head.scale = 10.0;
  head.margin = 0.3;
  head.weights.resize(2, 2);
  head.weights << 2.0, 0.0, 0.0, 5.0;
  RowMatrix x(1, 2);
  const double theta = 0.4;
  x << std::cos(theta), std::sin(theta);
  const std::vector<int> y = {0};
  const double target = 10.0 * std::cos(theta + 0.3);
  const double other = 10.0 * std::sin(theta);
  const double expected =
      -target + std::log(std::exp(target) + std::exp(other));
  CHECK(AamSoftmax(x, y, head).loss == doctest::Approx(expected).epsilon(1e-12));
  const double plain = -10.0 * std::cos(theta) +
                       std::log(std::exp(10.0 * std::cos(theta)) + std::exp(other));
  CHECK(AamSoftmax(x, y, head, 0.0).loss ==
        doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("the fallback branch applies past pi - m") {
  ClassifierHead head;
  head.num_classes = 2;
  head.scale = 4.0;
  head.margin = 0.4;
  head.weights.resize(2, 2);
  head.weights << 1.0, 0.0, 0.0, 1.0;
  RowMatrix x(1, 2);
  const double theta = 3.0;  // theta + m > pi
  x << std::cos(theta), std::sin(theta);
  const std::vector<int> y = {0};
  const double target = 4.0 * (std::cos(theta) - 0.4 * std::sin(0.4));
  const double other = 4.0 * std::sin(theta);
  CHECK(AamSoftmax(x, y, head).loss ==
        doctest::Approx(-target + std::log(std::exp(target) + std::exp(other)))
            .epsilon(1e-12));
}

TEST_CASE("sub-center loss takes the best sub-center per class") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const ClassifierHead multi = ClassifierHead::Random(4, 3, 6, rng());
    const RowMatrix x = testing::GaussianMatrix(1, 6, rng);
    const std::vector<int> y = {int(rng() % 4)};
    // Single-center head made of the winning sub-center of every class.
    const RowMatrix cos = testing::Cosines(x, multi.weights);
    ClassifierHead single = multi;
    single.num_subcenters = 1;
    single.weights.resize(4, 6);
    std::vector<int> winner(4);
    for (int c = 0; c < 4; ++c) {
      winner[c] = 3 * c;
      for (int k = 1; k < 3; ++k) {
        if (cos(0, 3 * c + k) > cos(0, winner[c])) winner[c] = 3 * c + k;
      }
      single.weights.row(c) = multi.weights.row(winner[c]);
    }
    const LossOutput a = AamSoftmax(x, y, single);
    const LossOutput b = SubcenterAamSoftmax(x, y, multi);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-12));
    CHECK((b.grad_embeddings - a.grad_embeddings).norm() < 1e-12);
    for (int r = 0; r < 12; ++r) {
      if (r == winner[r / 3]) {
        CHECK((b.grad_weights.row(r) - a.grad_weights.row(r / 3)).norm() < 1e-12);
      } else {
        CHECK(b.grad_weights.row(r).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("aam-softmax gradients match central differences") {
  CHECK(testing::AamGradientError(100, 1, 1) < 1e-4);
}

TEST_CASE("sub-center aam-softmax gradients match central differences") {
  CHECK(testing::AamGradientError(100, 2, 2) < 1e-4);
  CHECK(testing::AamGradientError(30, 3, 3) < 1e-4);
}

TEST_CASE("triplet gradients match central differences") {
  CHECK(testing::TripletGradientError(100, 4) < 1e-4);
}

TEST_CASE("joint loss gradients match central differences") {
  CHECK(testing::JointGradientError(100, 5) < 1e-4);
}

TEST_CASE("triplet loss value and inactive rows") {
  RowMatrix a(2, 2), p(2, 2), n(2, 2);
  a << 1, 0, 1, 0;
  p << 1, 0, 0, 1;
  n << -1, 0, 1, 0.1;
  // Row 0: d(a,p) = 0, d(a,n) = 2 -> inactive. Row 1: d(a,p) = 1,
  // d(a,n) = 1 - cos -> active.
  const double d_an = 1.0 - 1.0 / std::sqrt(1.01);
  const TripletOutput out = Triplet(a, p, n, 0.2);
  CHECK(out.loss == doctest::Approx((1.0 - d_an + 0.2) / 2.0).epsilon(1e-12));
  CHECK(out.grad_anchor.row(0).norm() == 0.0);
  CHECK(out.grad_positive.row(0).norm() == 0.0);
  CHECK(out.grad_negative.row(0).norm() == 0.0);
}

TEST_CASE("joint loss sums weighted components") {
  Rng rng(6);
  const ClassifierHead sh = ClassifierHead::Random(4, 1, 5, 1);
  const ClassifierHead th = ClassifierHead::Random(3, 2, 5, 2);
  LabeledBatch s{testing::GaussianMatrix(3, 5, rng), {0, 3, 1}};
  TripletBatch t{testing::GaussianMatrix(2, 5, rng),
                 testing::GaussianMatrix(2, 5, rng),
                 testing::GaussianMatrix(2, 5, rng)};
  LabeledBatch l{testing::GaussianMatrix(2, 5, rng), {2, 0}};
  JointWeights w{0.5, 2.0, 1.5};
  const JointLossOutput j = JointLoss(s, t, l, sh, th, 0.3, w);
  const double src = AamSoftmax(s.embeddings, s.labels, sh).loss;
  const double tri = Triplet(t.anchor, t.positive, t.negative, 0.3).loss;
  const double tgt = SubcenterAamSoftmax(l.embeddings, l.labels, th).loss;
  CHECK(j.source_loss == doctest::Approx(src).epsilon(1e-12));
  CHECK(j.triplet_loss == doctest::Approx(tri).epsilon(1e-12));
  CHECK(j.target_loss == doctest::Approx(tgt).epsilon(1e-12));
  CHECK(j.loss == doctest::Approx(0.5 * src + 2.0 * tri + 1.5 * tgt).epsilon(1e-12));

  const JointLossOutput only_source = JointLoss(s, {}, {}, sh, th);
  CHECK(only_source.loss == doctest::Approx(src).epsilon(1e-12));
  CHECK(ThrownKind([&] { JointLoss({}, {}, {}, sh, th); }) ==
        ErrorKind::kEmptyBatch);
}

TEST_CASE("loss input errors") {
  const ClassifierHead head = ClassifierHead::Random(3, 1, 4, 1);
  RowMatrix x = RowMatrix::Ones(2, 4);
  const std::vector<int> bad_label = {0, 3};
  CHECK(ThrownKind([&] { AamSoftmax(x, bad_label, head); }) ==
        ErrorKind::kLabel);
  const std::vector<int> ok = {0, 1};
  RowMatrix zero = RowMatrix::Zero(2, 4);
  CHECK(ThrownKind([&] { AamSoftmax(zero, ok, head); }) == ErrorKind::kNorm);
  const std::vector<int> short_labels = {0};
  CHECK(ThrownKind([&] { AamSoftmax(x, short_labels, head); }) ==
        ErrorKind::kShape);
  CHECK(ThrownKind([&] { SubcenterAamSoftmax(x, ok, head); }) ==
        ErrorKind::kConfig);
  CHECK(ThrownKind([&] { Triplet(x, x, RowMatrix::Ones(2, 3), 0.2); }) ==
        ErrorKind::kShape);
}

}  // namespace
}  // namespace sv
