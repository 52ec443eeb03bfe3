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

#include "sv/embedder.h"

#include <random>

#include "sv/dsp.h"
#include "sv/error.h"
#include "sv/losses.h"
#include "sv/parallel.h"
#include "sv/random.h"

namespace sv {

Embedder::Embedder(RowMatrix projection, Eigen::VectorXd bias)
    : projection_(std::move(projection)), bias_(std::move(bias)) {
  if (projection_.rows() == 0 || projection_.cols() == 0 ||
      bias_.size() != projection_.rows()) {
    throw Error(ErrorKind::kShape, "inconsistent projection and bias sizes");
  }
}

void Embedder::SetProjection(RowMatrix projection, Eigen::VectorXd bias) {
  if (projection.rows() != projection_.rows() ||
      projection.cols() != projection_.cols() ||
      bias.size() != bias_.size()) {
    throw Error(ErrorKind::kShape, "projection shape cannot change");
  }
  projection_ = std::move(projection);
  bias_ = std::move(bias);
}

RowMatrix Embedder::Representations(const std::vector<std::string>& ids,
                                    int view, int workers) const {
  RowMatrix out(ids.size(), representation_dim());
  ParallelFor(ids.size(), workers, [&](std::size_t i) {
    const Eigen::VectorXd h = Representation(ids[i], view);
    if (h.size() != representation_dim()) {
      throw Error(ErrorKind::kShape, "representation of " + ids[i] +
                                         " has the wrong dimension");
    }
    out.row(i) = h.transpose();
  });
  return out;
}

RowMatrix Embedder::Project(const RowMatrix& representations) const {
  RowMatrix out = representations * projection_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

std::vector<float> Embedder::Extract(const std::string& id) const {
  const Eigen::VectorXd e = projection_ * Representation(id, 0) + bias_;
  std::vector<float> out(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) out[i] = static_cast<float>(e[i]);
  return out;
}

EmbeddingSet Embedder::ExtractAll(const std::vector<std::string>& ids,
                                  int workers) const {
  std::vector<std::vector<float>> rows(ids.size());
  ParallelFor(ids.size(), workers,
              [&](std::size_t i) { rows[i] = Extract(ids[i]); });
  EmbeddingSet out(dim());
  for (std::size_t i = 0; i < ids.size(); ++i) out.Add(ids[i], rows[i]);
  return out;
}

void Embedder::ProjectionStep(const RowMatrix& representations,
                              const RowMatrix& grad_embeddings, double lr,
                              double weight_decay) {
  const RowMatrix grad_w = grad_embeddings.transpose() * representations;
  const Eigen::VectorXd grad_b = grad_embeddings.colwise().sum().transpose();
  SgdStep(projection_, grad_w, lr, weight_decay);
  SgdStep(std::span<double>(bias_.data(), bias_.size()),
          std::span<const double>(grad_b.data(), grad_b.size()), lr, 0.0);
}

// Starting from class means lets training refine rather than scramble an
// already useful projection.
ClassifierHead MeanInitializedHead(const RowMatrix& embeddings,
                                   const LabeledIds& data, int num_subcenters,
                                   std::uint64_t seed) {
  const int dim = static_cast<int>(embeddings.cols());
  RowMatrix means = RowMatrix::Zero(data.n_classes, dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    means.row(data.labels[i]) += embeddings.row(i);
  }
  ClassifierHead head =
      ClassifierHead::Random(data.n_classes, num_subcenters, dim, seed);
  for (int c = 0; c < data.n_classes; ++c) {
    const double norm = means.row(c).norm();
    for (int k = 0; k < num_subcenters; ++k) {
      auto row = head.weights.row(c * num_subcenters + k);
      const Eigen::RowVectorXd noise = row / std::sqrt(double(dim));
      row = norm > 0.0 ? Eigen::RowVectorXd(means.row(c) / norm + 0.05 * noise)
                       : noise;
    }
  }
  return head;
}

std::vector<double> Embedder::TrainProjection(const LabeledIds& data,
                                              const TrainPhaseConfig& config,
                                              const AdaptOptions& options) {
  config.Validate();
  if (data.empty()) throw Error(ErrorKind::kEmptyData, "no adaptation data");
  if (data.labels.size() != data.ids.size()) {
    throw Error(ErrorKind::kShape, "adaptation ids and labels differ in size");
  }
  for (int l : data.labels) {
    if (l < 0 || l >= data.n_classes) {
      throw Error(ErrorKind::kLabel, "adaptation label out of range");
    }
  }
  std::vector<double> trace;
  if (options.steps <= 0) return trace;
  const RowMatrix h = Representations(data.ids, 0, options.workers);
  ClassifierHead head =
      MeanInitializedHead(Project(h), data, options.num_subcenters,
                          DeriveSeed(options.seed, "head"));
  head.scale = config.scale;
  Rng rng(DeriveSeed(options.seed, "batches"));
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const int batch = config.batch_size;
  RowMatrix hb(batch, representation_dim());
  std::vector<int> labels(batch);
  for (int step = 0; step < options.steps; ++step) {
    for (int r = 0; r < batch; ++r) {
      const std::size_t i = pick(rng);
      hb.row(r) = h.row(i);
      labels[r] = data.labels[i];
    }
    const double epochs =
        EpochProgress(step, batch, static_cast<long>(data.size()));
    head.margin = MarginAt(config, epochs);
    const double lr = LrAt(config, step);
    const RowMatrix e = Project(hb);
    const LossOutput out = head.num_subcenters > 1
                               ? SubcenterAamSoftmax(e, labels, head)
                               : AamSoftmax(e, labels, head);
    ProjectionStep(hb, out.grad_embeddings, lr, config.weight_decay);
    SgdStep(head.weights, out.grad_weights, lr, config.weight_decay);
    trace.push_back(out.loss);
  }
  return trace;
}

std::unique_ptr<Embedder> Embedder::Adapt(const LabeledIds& data,
                                          const TrainPhaseConfig& config,
                                          const AdaptOptions& options) const {
  std::unique_ptr<Embedder> out = Clone();
  out->TrainProjection(data, config, options);
  return out;
}

namespace {

RowMatrix HeadWeight(const ResUnet& network) {
  const Param& w = network.head_weight();
  RowMatrix out(w.shape[0], w.shape[1]);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = w.values[i];
  return out;
}

Eigen::VectorXd HeadBias(const ResUnet& network) {
  const Param& b = network.head_bias();
  Eigen::VectorXd out(b.values.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = b.values[i];
  return out;
}

}  // namespace

ResUnetEmbedder::ResUnetEmbedder(std::shared_ptr<const ResUnet> network,
                                 std::string feature_dir, int crop_frames,
                                 std::uint64_t seed)
    : Embedder(HeadWeight(*network), HeadBias(*network)),
      network_(std::move(network)),
      feature_dir_(std::move(feature_dir)),
      crop_frames_(crop_frames),
      seed_(seed) {}

Eigen::VectorXd ResUnetEmbedder::Representation(const std::string& id,
                                                int view) const {
  FeatureMatrix features = ReadFeatures(feature_dir_ + "/" + id + ".fbk");
  if (view != 0) {
    Rng rng(DeriveSeed(seed_, id, "view" + std::to_string(view)));
    features = Crop(features, crop_frames_, rng);
  }
  const std::vector<float> pooled = network_->PooledFeatures(features);
  Eigen::VectorXd out(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) out[i] = pooled[i];
  return out;
}

std::unique_ptr<Embedder> ResUnetEmbedder::Clone() const {
  return std::make_unique<ResUnetEmbedder>(*this);
}

}  // namespace sv
