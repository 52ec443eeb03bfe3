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

#ifndef SV_SYNTHETIC_H_
#define SV_SYNTHETIC_H_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "sv/corpus_io.h"
#include "sv/embedder.h"
#include "sv/matrix.h"

namespace sv {

using SpeakerMap = std::unordered_map<std::string, std::string>;

// Unit vectors with pairwise angles of at least `min_angle_deg`, by
// rejection sampling. Throws ConfigError when the constraint cannot be met.
RowMatrix SeparatedDirections(int count, int dim, double min_angle_deg,
                              std::uint64_t seed);

// Rotates unit vector `mean` by `angle` radians towards a random orthogonal
// direction drawn from `rng`.
Eigen::VectorXd Perturb(const Eigen::VectorXd& mean, double angle, Rng& rng);

// Unit-norm embeddings of `speakers` x `utts` utterances with ids
// `spk<s>-utt<u>`: each lies at an angle |N(0, intra_sigma_deg)|, truncated
// at intra_max_deg, from its speaker direction; speaker directions are at
// least min_inter_deg apart. `truth` receives id -> speaker.
EmbeddingSet PlantedPartition(int speakers, int utts, int dim,
                              double intra_sigma_deg, double intra_max_deg,
                              double min_inter_deg, std::uint64_t seed,
                              SpeakerMap* truth = nullptr);

struct SyntheticOptions {
  int dim = 64;
  int source_speakers = 40;
  int source_utts = 20;
  int target_speakers = 50;
  int target_utts = 40;
  int labeled_target_speakers = 5;
  int labeled_target_utts = 10;
  int validation_speakers = 20;
  int validation_utts = 10;
  double intra_sigma_deg = 5.0;
  double min_inter_deg = 45.0;
  double view_sigma_deg = 2.5;
  // Target-domain utterances see their speaker coordinates rotated towards a
  // per-utterance nuisance vector by this angle, plus a constant offset.
  double shift_angle_deg = 60.0;
  double nuisance_scale = 1.0;
  // Nuisance vectors span this many fixed directions; 0 draws them from the
  // whole space.
  int nuisance_rank = 4;
  double offset_scale = 0.5;
  // Per-round multiplier on the shift under perfect pseudo labels.
  double shrink = 0.5;
  std::uint64_t seed = 0;
};

// Desk-scale stand-in for a trained network: h(id) is a planted speaker
// vector, corrupted for target-domain utterances by a domain shift that
// Adapt() shrinks by a factor which depends on pseudo-label quality.
class SyntheticEmbedder : public Embedder {
 public:
  struct Utterance {
    int speaker = 0;
    bool target_domain = false;
    bool adaptation_pool = false;  // unlabeled target-domain data
  };

  SyntheticEmbedder(const SyntheticOptions& options, RowMatrix speaker_means,
                    std::unordered_map<std::string, Utterance> utterances);

  Eigen::VectorXd Representation(const std::string& id,
                                 int view) const override;
  std::unique_ptr<Embedder> Clone() const override;

  // Trains the projection, then scales the shift angle and offset by
  // 1 - (1 - shrink) * F, F being the harmonic mean of purity and inverse
  // purity of the target-domain labels in `data` against the planted
  // speakers. Perfect labels shrink the shift by exactly `shrink`.
  std::unique_ptr<Embedder> Adapt(const LabeledIds& data,
                                  const TrainPhaseConfig& config,
                                  const AdaptOptions& options) const override;

  double PseudoLabelQuality(const LabeledIds& data) const;
  double shift_angle_deg() const { return shift_angle_deg_; }
  double offset_scale() const { return offset_scale_; }

 private:
  SyntheticOptions options_;
  RowMatrix speaker_means_;
  std::shared_ptr<const std::unordered_map<std::string, Utterance>>
      utterances_;
  Eigen::VectorXd offset_direction_;
  RowMatrix nuisance_basis_;  // nuisance_rank x dim, orthonormal rows
  double shift_angle_deg_;
  double offset_scale_;
  long pool_size_ = 0;
};

struct SyntheticScenario {
  Manifest manifest;     // source, unlabeled target and labeled target data
  TrialList validation;  // all pairs over held-out target-domain speakers
  SpeakerMap truth;      // every id -> planted speaker name
  std::unique_ptr<SyntheticEmbedder> embedder;
};

SyntheticScenario MakeSyntheticScenario(const SyntheticOptions& options);

}  // namespace sv

#endif  // SV_SYNTHETIC_H_
