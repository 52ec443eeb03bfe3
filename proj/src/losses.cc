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

#include "sv/losses.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sv/error.h"
#include "sv/random.h"

namespace sv {

ClassifierHead ClassifierHead::Random(int num_classes, int num_subcenters,
                                      int dim, std::uint64_t seed) {
  if (num_classes < 1 || num_subcenters < 1 || dim < 1) {
    throw Error(ErrorKind::kConfig, "classifier head sizes must be >= 1");
  }
  ClassifierHead head;
  head.num_classes = num_classes;
  head.num_subcenters = num_subcenters;
  head.weights.resize(static_cast<Eigen::Index>(num_classes) * num_subcenters,
                      dim);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < head.weights.size(); ++i) {
    head.weights.data()[i] = gauss(rng);
  }
  return head;
}

namespace {

LossOutput MarginSoftmax(const RowMatrix& x, std::span<const int> labels,
                         const ClassifierHead& head, double margin) {
  const int batch = static_cast<int>(x.rows());
  const int dim = static_cast<int>(x.cols());
  const int classes = head.num_classes;
  const int sub = head.num_subcenters;
  if (batch < 1) throw Error(ErrorKind::kEmptyBatch, "empty batch");
  if (static_cast<int>(labels.size()) != batch) {
    throw Error(ErrorKind::kShape, "labels and embeddings differ in length");
  }
  if (head.dim() != dim ||
      head.weights.rows() != static_cast<Eigen::Index>(classes) * sub) {
    throw Error(ErrorKind::kShape, "classifier head shape mismatch");
  }
  if (!(head.scale > 0.0)) throw Error(ErrorKind::kConfig, "scale must be > 0");

  const Eigen::VectorXd wnorm = head.weights.rowwise().norm();
  if ((wnorm.array() == 0.0).any()) {
    throw Error(ErrorKind::kNorm, "zero classifier weight row");
  }
  const RowMatrix what = wnorm.cwiseInverse().asDiagonal() * head.weights;
  const double s = head.scale;
  const double cos_m = std::cos(margin);
  const double sin_m = std::sin(margin);
  // theta + m <= pi  <=>  cos(theta) >= cos(pi - m)
  const double threshold = -cos_m;
  const double lo = -1.0 + kCosineClampEps;
  const double hi = 1.0 - kCosineClampEps;

  LossOutput out;
  out.grad_embeddings = RowMatrix::Zero(batch, dim);
  out.grad_weights = RowMatrix::Zero(head.weights.rows(), dim);
  std::vector<double> raw(classes), logits(classes), dlogit(classes);
  std::vector<int> chosen(classes);
  double total = 0.0;
  for (int b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || y >= classes) {
      throw Error(ErrorKind::kLabel, "label " + std::to_string(y) +
                                         " outside [0, " +
                                         std::to_string(classes) + ")");
    }
    const double xnorm = x.row(b).norm();
    if (xnorm == 0.0) throw Error(ErrorKind::kNorm, "zero embedding");
    const Eigen::RowVectorXd xhat = x.row(b) / xnorm;
    const Eigen::VectorXd cos_all = what * xhat.transpose();
    for (int j = 0; j < classes; ++j) {
      int best = j * sub;
      for (int k = 1; k < sub; ++k) {
        if (cos_all[j * sub + k] > cos_all[best]) best = j * sub + k;
      }
      chosen[j] = best;
      raw[j] = cos_all[best];
      const double c = std::clamp(raw[j], lo, hi);
      if (j == y) {
        if (c >= threshold) {
          const double sin_t = std::sqrt(1.0 - c * c);
          logits[j] = s * (c * cos_m - sin_t * sin_m);
          dlogit[j] = s * (cos_m + c * sin_m / sin_t);
        } else {
          logits[j] = s * (c - margin * sin_m);
          dlogit[j] = s;
        }
      } else {
        logits[j] = s * c;
        dlogit[j] = s;
      }
      if (raw[j] < lo || raw[j] > hi) dlogit[j] = 0.0;
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - zmax);
    const double log_denom = std::log(denom) + zmax;
    total += log_denom - logits[y];
    for (int j = 0; j < classes; ++j) {
      const double p = std::exp(logits[j] - log_denom);
      const double g = (p - (j == y ? 1.0 : 0.0)) * dlogit[j] / batch;
      if (g == 0.0) continue;
      const int row = chosen[j];
      // d cos / d x = (w_hat - cos x_hat) / |x|
      out.grad_embeddings.row(b) +=
          g * (what.row(row) - raw[j] * xhat) / xnorm;
      // d cos / d w = (x_hat - cos w_hat) / |w|
      out.grad_weights.row(row) +=
          g * (xhat - raw[j] * what.row(row)) / wnorm[row];
    }
  }
  out.loss = total / batch;
  return out;
}

void CheckMargin(double margin) {
  if (!(margin >= 0.0) || margin > 0.5) {
    throw Error(ErrorKind::kConfig, "margin must lie in [0, 0.5]");
  }
}

}  // namespace

LossOutput AamSoftmax(const RowMatrix& embeddings, std::span<const int> labels,
                      const ClassifierHead& head,
                      std::optional<double> margin_override) {
  if (head.num_subcenters != 1) {
    throw Error(ErrorKind::kConfig, "AamSoftmax expects one sub-center");
  }
  const double m = margin_override.value_or(head.margin);
  CheckMargin(m);
  return MarginSoftmax(embeddings, labels, head, m);
}

LossOutput SubcenterAamSoftmax(const RowMatrix& embeddings,
                               std::span<const int> labels,
                               const ClassifierHead& head,
                               std::optional<double> margin_override) {
  if (head.num_subcenters < 2) {
    throw Error(ErrorKind::kConfig, "sub-center loss expects >= 2 sub-centers");
  }
  const double m = margin_override.value_or(head.margin);
  CheckMargin(m);
  return MarginSoftmax(embeddings, labels, head, m);
}

TripletOutput Triplet(const RowMatrix& anchor, const RowMatrix& positive,
                      const RowMatrix& negative, double margin) {
  const auto batch = anchor.rows();
  const auto dim = anchor.cols();
  if (positive.rows() != batch || negative.rows() != batch ||
      positive.cols() != dim || negative.cols() != dim) {
    throw Error(ErrorKind::kShape, "triplet inputs differ in shape");
  }
  if (batch < 1) throw Error(ErrorKind::kEmptyBatch, "empty triplet batch");
  TripletOutput out;
  out.grad_anchor = RowMatrix::Zero(batch, dim);
  out.grad_positive = RowMatrix::Zero(batch, dim);
  out.grad_negative = RowMatrix::Zero(batch, dim);
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double na = anchor.row(i).norm();
    const double np = positive.row(i).norm();
    const double nn = negative.row(i).norm();
    if (na == 0.0 || np == 0.0 || nn == 0.0) {
      throw Error(ErrorKind::kNorm, "zero-norm vector in triplet " +
                                        std::to_string(i));
    }
    const Eigen::RowVectorXd a = anchor.row(i) / na;
    const Eigen::RowVectorXd p = positive.row(i) / np;
    const Eigen::RowVectorXd n = negative.row(i) / nn;
    const double cos_ap = a.dot(p);
    const double cos_an = a.dot(n);
    // d(a,p) - d(a,n) + margin = cos(a,n) - cos(a,p) + margin
    const double hinge = cos_an - cos_ap + margin;
    if (hinge <= 0.0) continue;
    total += hinge;
    const double inv = 1.0 / static_cast<double>(batch);
    out.grad_anchor.row(i) =
        inv * ((n - cos_an * a) - (p - cos_ap * a)) / na;
    out.grad_positive.row(i) = -inv * (a - cos_ap * p) / np;
    out.grad_negative.row(i) = inv * (a - cos_an * n) / nn;
  }
  out.loss = total / static_cast<double>(batch);
  return out;
}

JointLossOutput JointLoss(const LabeledBatch& source,
                          const TripletBatch& target_unlabeled,
                          const LabeledBatch& target_labeled,
                          const ClassifierHead& source_head,
                          const ClassifierHead& target_head,
                          double triplet_margin, const JointWeights& weights) {
  if (source.empty() && target_unlabeled.empty() && target_labeled.empty()) {
    throw Error(ErrorKind::kEmptyBatch, "all joint-loss components are empty");
  }
  auto margin_loss = [](const LabeledBatch& batch, const ClassifierHead& head) {
    return head.num_subcenters > 1
               ? SubcenterAamSoftmax(batch.embeddings, batch.labels, head)
               : AamSoftmax(batch.embeddings, batch.labels, head);
  };
  JointLossOutput out;
  out.grad_source_head = RowMatrix::Zero(source_head.weights.rows(),
                                         source_head.weights.cols());
  out.grad_target_head = RowMatrix::Zero(target_head.weights.rows(),
                                         target_head.weights.cols());
  if (!source.empty()) {
    LossOutput l = margin_loss(source, source_head);
    out.source_loss = l.loss;
    out.grad_source = weights.source * l.grad_embeddings;
    out.grad_source_head = weights.source * l.grad_weights;
  }
  if (!target_unlabeled.empty()) {
    TripletOutput t = Triplet(target_unlabeled.anchor, target_unlabeled.positive,
                              target_unlabeled.negative, triplet_margin);
    out.triplet_loss = t.loss;
    out.grad_anchor = weights.triplet * t.grad_anchor;
    out.grad_positive = weights.triplet * t.grad_positive;
    out.grad_negative = weights.triplet * t.grad_negative;
  }
  if (!target_labeled.empty()) {
    LossOutput l = margin_loss(target_labeled, target_head);
    out.target_loss = l.loss;
    out.grad_target = weights.target_labeled * l.grad_embeddings;
    out.grad_target_head = weights.target_labeled * l.grad_weights;
  }
  out.loss = weights.source * out.source_loss +
             weights.triplet * out.triplet_loss +
             weights.target_labeled * out.target_loss;
  return out;
}

}  // namespace sv
