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

#ifndef SV_LOSSES_H_
#define SV_LOSSES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sv/matrix.h"

namespace sv {

// Cosine clamp applied before the angular margin.
inline constexpr double kCosineClampEps = 1e-7;

// Class weight vectors for (sub-center) AAM-softmax. Row j * num_subcenters
// + k holds sub-center k of class j. Rows are normalized inside the loss,
// the stored values are unconstrained.
struct ClassifierHead {
  int num_classes = 0;
  int num_subcenters = 1;
  double scale = 32.0;
  double margin = 0.2;
  RowMatrix weights;

  int dim() const { return static_cast<int>(weights.cols()); }

  // Gaussian rows from a seeded stream.
  static ClassifierHead Random(int num_classes, int num_subcenters, int dim,
                               std::uint64_t seed);
};

struct LossOutput {
  double loss = 0.0;           // mean over the batch
  RowMatrix grad_embeddings;   // B x d
  RowMatrix grad_weights;      // same shape as head.weights
};

// ArcFace loss: target logit s cos(theta_y + m) while theta_y + m <= pi,
// otherwise s (cos theta_y - m sin m); other logits s cos theta_j.
// Requires num_subcenters == 1. Throws LabelError / NormError.
LossOutput AamSoftmax(const RowMatrix& embeddings, std::span<const int> labels,
                      const ClassifierHead& head,
                      std::optional<double> margin_override = std::nullopt);

// As AamSoftmax with each class cosine taken as the max over its
// sub-centers; only the selected sub-center (lowest index on ties) receives
// gradient.
LossOutput SubcenterAamSoftmax(
    const RowMatrix& embeddings, std::span<const int> labels,
    const ClassifierHead& head,
    std::optional<double> margin_override = std::nullopt);

struct TripletOutput {
  double loss = 0.0;
  RowMatrix grad_anchor;
  RowMatrix grad_positive;
  RowMatrix grad_negative;
};

// mean_i max(0, d(a_i, p_i) - d(a_i, n_i) + margin), d = 1 - cosine.
TripletOutput Triplet(const RowMatrix& anchor, const RowMatrix& positive,
                      const RowMatrix& negative, double margin);

struct LabeledBatch {
  RowMatrix embeddings;
  std::vector<int> labels;

  bool empty() const { return embeddings.rows() == 0; }
};

struct TripletBatch {
  RowMatrix anchor;
  RowMatrix positive;
  RowMatrix negative;

  bool empty() const { return anchor.rows() == 0; }
};

struct JointWeights {
  double source = 1.0;
  double triplet = 1.0;
  double target_labeled = 1.0;
};

struct JointLossOutput {
  double loss = 0.0;
  double source_loss = 0.0;
  double triplet_loss = 0.0;
  double target_loss = 0.0;
  RowMatrix grad_source;
  RowMatrix grad_anchor;
  RowMatrix grad_positive;
  RowMatrix grad_negative;
  RowMatrix grad_target;
  RowMatrix grad_source_head;
  RowMatrix grad_target_head;
};

// Weighted sum of source AAM, target triplet and labeled-target AAM losses;
// a head with more than one sub-center uses the sub-center loss. Empty
// components contribute nothing. Throws EmptyBatch when all are empty.
JointLossOutput JointLoss(const LabeledBatch& source,
                          const TripletBatch& target_unlabeled,
                          const LabeledBatch& target_labeled,
                          const ClassifierHead& source_head,
                          const ClassifierHead& target_head,
                          double triplet_margin = 0.2,
                          const JointWeights& weights = {});

}  // namespace sv

#endif  // SV_LOSSES_H_
