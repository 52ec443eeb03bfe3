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

#ifndef SV_PIPELINE_H_
#define SV_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sv/backend.h"
#include "sv/clustering.h"
#include "sv/corpus_io.h"
#include "sv/embedder.h"
#include "sv/metrics.h"
#include "sv/schedule.h"

namespace sv {

// The three data streams of stage-1 adaptation.
struct AdaptationCorpus {
  LabeledIds source;                       // labeled source domain
  std::vector<std::string> target_unlabeled;
  LabeledIds target_labeled;               // small labeled target set
};

// Splits a manifest by domain and label flag; class ids are dense in
// sorted speaker order within each labeled stream.
AdaptationCorpus CorpusFromManifest(const Manifest& manifest);

struct PipelineConfig {
  int kmeans_k = 20000;
  std::vector<int> ahc_candidates = {1000, 2000, 3000, 4000};
  int min_count = 10;
  int max_rounds = 3;
  double converge_epsilon = 0.001;  // absolute EER improvement, fraction
  bool reselect_each_round = false;
  std::uint64_t seed = 0;
  int kmeans_batch_size = 4096;
  int kmeans_max_iters = 100;
  Linkage linkage = Linkage::kAverage;
  int num_subcenters = 2;
  int stage1_steps = 500;
  int adapt_steps = 200;
  double triplet_margin = 0.2;
  int triplet_views = 8;
  TrainPhaseConfig stage1 =
      TrainPhaseConfig::Defaults(TrainPhase::kInitial, Track::kTrack1);
  TrainPhaseConfig adaptation = TrainPhaseConfig::Defaults(
      TrainPhase::kAdaptationFinetune, Track::kTrack1);
  DcfParams dcf;
  int workers = 1;

  // Throws ConfigError.
  void Validate() const;
};

struct RoundReport {
  int round = 0;
  int n_clusters = 0;
  int n_speakers = 0;  // pseudo-speakers left after filtering
  double eer = 0.0;    // fraction
  double min_dcf = 0.0;

  bool operator==(const RoundReport&) const = default;
};

// Run log: header `round n_clusters n_speakers eer_percent min_dcf`.
void WriteRunLog(const std::vector<RoundReport>& reports,
                 const std::string& path);
std::vector<RoundReport> ReadRunLog(const std::string& path);

struct Stage1Result {
  std::unique_ptr<Embedder> embedder;
  std::vector<double> losses;  // joint loss of every step
};

// Toy joint trainer: per step a source batch, a target triplet batch (two
// views of one utterance against another utterance) and a labeled-target
// batch feed JointLoss; the projection and both heads take an SGD step under
// the stage-1 schedule. Throws EmptyData when a stream is empty.
Stage1Result Stage1JointAdapt(const Embedder& embedder,
                              const AdaptationCorpus& corpus,
                              const PipelineConfig& config);

// Cosine scoring after centering on the mean of the validation embeddings.
Metrics EvaluateEmbedder(const Embedder& embedder, const TrialList& trials,
                         const PipelineConfig& config);

// Extract, L2-normalize, mini-batch k-means with k clamped to the
// utterance count, AHC at n_clusters clamped to k, compose and filter.
PseudoLabelSet ClusterTargets(const Embedder& embedder,
                              const std::vector<std::string>& ids,
                              int n_clusters, const PipelineConfig& config,
                              int round);

// Source classes followed by pseudo-speakers offset past them.
LabeledIds UnionInventory(const LabeledIds& source,
                          const PseudoLabelSet& pseudo);

struct RoundResult {
  std::unique_ptr<Embedder> embedder;
  RoundReport report;
  PseudoLabelSet labels;
};

// One cluster -> filter -> adapt -> evaluate round.
RoundResult RunRound(const Embedder& embedder, const AdaptationCorpus& corpus,
                     const TrialList& validation, const PipelineConfig& config,
                     int round, int n_clusters);

// Candidate with the lowest EER; ties go to the lower MinDCF, then to the
// smaller count. Reports follow candidate order.
struct Selection {
  int best_n = 0;
  std::size_t best_index = 0;
  std::vector<RoundReport> reports;
};
Selection SelectBest(const std::vector<int>& candidates,
                     const std::function<RoundReport(int)>& evaluate);

struct SelectionResult {
  Selection selection;
  RoundResult best;
};
SelectionResult SelectClusterCount(const Embedder& embedder,
                                   const AdaptationCorpus& corpus,
                                   const TrialList& validation,
                                   const PipelineConfig& config, int round);

// True once max_rounds reports exist or the last round improved EER over
// the previous one by less than converge_epsilon.
bool ShouldStop(const std::vector<RoundReport>& reports,
                const PipelineConfig& config);

struct ConvergenceResult {
  std::unique_ptr<Embedder> embedder;
  std::vector<RoundReport> reports;
  std::vector<PseudoLabelSet> labels;
  int n_clusters = 0;
};

// Rounds until ShouldStop. The cluster count is selected in round 1 and
// reused unless reselect_each_round is set.
ConvergenceResult RunUntilConverged(const Embedder& embedder,
                                    const AdaptationCorpus& corpus,
                                    const TrialList& validation,
                                    const PipelineConfig& config);

struct SystemScores {
  ScoreSet evaluation;
  ScoreSet calibration;  // scores of the calibration trials
};

struct FusionResult {
  std::vector<CalibrationModel> models;
  std::vector<ScoreSet> calibrated;
  ScoreSet fused;
  Metrics metrics;
};

// Calibrates every system on its calibration scores, fuses the calibrated
// evaluation scores with equal weights and evaluates the result.
FusionResult FuseSystems(const std::vector<SystemScores>& systems,
                         const std::vector<bool>& calibration_labels,
                         const std::vector<bool>& evaluation_labels,
                         const DurationMap& durations,
                         const CalibrationOptions& options = {},
                         const DcfParams& dcf = {});

}  // namespace sv

#endif  // SV_PIPELINE_H_
