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

#ifndef SV_EMBEDDER_H_
#define SV_EMBEDDER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sv/corpus_io.h"
#include "sv/losses.h"
#include "sv/matrix.h"
#include "sv/resunet.h"
#include "sv/schedule.h"

namespace sv {

// Utterance ids with dense integer class labels in [0, n_classes).
struct LabeledIds {
  std::vector<std::string> ids;
  std::vector<int> labels;
  int n_classes = 0;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

struct AdaptOptions {
  int steps = 200;
  int num_subcenters = 2;
  std::uint64_t seed = 0;
  int workers = 1;
};

// An embedding extractor split into a frozen representation h(id, view) and
// a trainable affine projection e = W h + b. View 0 is the full utterance;
// other views are seeded perturbations such as random crops.
class Embedder {
 public:
  Embedder(RowMatrix projection, Eigen::VectorXd bias);
  virtual ~Embedder() = default;

  int dim() const { return static_cast<int>(projection_.rows()); }
  int representation_dim() const {
    return static_cast<int>(projection_.cols());
  }

  virtual Eigen::VectorXd Representation(const std::string& id,
                                         int view) const = 0;
  virtual std::unique_ptr<Embedder> Clone() const = 0;

  // Supervised adaptation on labeled ids: trains the projection and a fresh
  // sub-center AAM head with SGD under `config`, starting from this state.
  virtual std::unique_ptr<Embedder> Adapt(const LabeledIds& data,
                                          const TrainPhaseConfig& config,
                                          const AdaptOptions& options) const;

  // Rows are h(ids[i], view).
  RowMatrix Representations(const std::vector<std::string>& ids, int view,
                            int workers = 1) const;
  std::vector<float> Extract(const std::string& id) const;
  EmbeddingSet ExtractAll(const std::vector<std::string>& ids,
                          int workers = 1) const;

  const RowMatrix& projection() const { return projection_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  // Throws ShapeError when the dimensions change.
  void SetProjection(RowMatrix projection, Eigen::VectorXd bias);

  // Embeddings of a representation batch, one row per input row.
  RowMatrix Project(const RowMatrix& representations) const;
  // SGD update of W and b from gradients with respect to Project(h).
  void ProjectionStep(const RowMatrix& representations,
                      const RowMatrix& grad_embeddings, double lr,
                      double weight_decay);

  // Returns the batch loss of every step.
  std::vector<double> TrainProjection(const LabeledIds& data,
                                      const TrainPhaseConfig& config,
                                      const AdaptOptions& options);

 private:
  RowMatrix projection_;
  Eigen::VectorXd bias_;
};

// Class-mean initialized (sub-center) AAM head for `embeddings` whose rows
// align with data.ids: every sub-center starts at the normalized class mean
// plus a small seeded perturbation.
ClassifierHead MeanInitializedHead(const RowMatrix& embeddings,
                                   const LabeledIds& data, int num_subcenters,
                                   std::uint64_t seed);

// Frozen ResUnet trunk over per-utterance feature files `<dir>/<id>.fbk`;
// the projection starts as the network's affine layer.
class ResUnetEmbedder : public Embedder {
 public:
  ResUnetEmbedder(std::shared_ptr<const ResUnet> network,
                  std::string feature_dir, int crop_frames,
                  std::uint64_t seed);

  Eigen::VectorXd Representation(const std::string& id,
                                 int view) const override;
  std::unique_ptr<Embedder> Clone() const override;

  const ResUnet& network() const { return *network_; }

 private:
  std::shared_ptr<const ResUnet> network_;
  std::string feature_dir_;
  int crop_frames_;
  std::uint64_t seed_;
};

}  // namespace sv

#endif  // SV_EMBEDDER_H_
