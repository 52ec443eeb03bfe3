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

#ifndef SV_BACKEND_H_
#define SV_BACKEND_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sv/corpus_io.h"
#include "sv/random.h"

namespace sv {

// Throws NormError when either vector is zero, ShapeError on a length
// mismatch. Accumulates in double.
double Cosine(std::span<const float> a, std::span<const float> b);

// Every vector scaled to unit length. Throws NormError on a zero vector.
EmbeddingSet L2Normalize(const EmbeddingSet& set);

// Subtracts the mean vector of `pool` from every vector of `set`.
EmbeddingSet SubMean(const EmbeddingSet& set, const EmbeddingSet& pool);

// One cosine score per trial in trial order. Throws UnknownUtterance.
ScoreSet ScoreTrials(const EmbeddingSet& embeddings, const TrialList& trials,
                     int workers = 1);

// Labels of `trials` for scores listed in the same trial order. Throws
// AlignmentError when the pairs differ and ParseError for unlabeled trials.
std::vector<bool> AlignedLabels(const ScoreSet& scores, const TrialList& trials);

// Samples same-speaker and cross-speaker pairs uniformly without
// replacement from the labeled records. Target trials come first, each
// group in pair-enumeration order. Throws NotEnoughData.
TrialList MakeCalibrationTrials(const Manifest& labeled, Rng& rng,
                                std::uint64_t n_target,
                                std::uint64_t n_nontarget);

// Log-odds model s' = w0 + w1 s + w2 (q - quality_mean) / quality_std with
// q the shorter of the two trial durations.
struct CalibrationModel {
  double w0 = 0.0;
  double w1 = 1.0;
  double w2 = 0.0;
  double quality_mean = 0.0;
  double quality_std = 1.0;

  bool operator==(const CalibrationModel&) const = default;
};

struct CalibrationOptions {
  int max_iters = 1000;
  double l2 = 1e-4;
  double learning_rate = 0.1;
};

// Per-trial quality: min(duration(enroll), duration(test)).
std::vector<double> TrialQualities(const ScoreSet& scores,
                                   const DurationMap& durations);

// Regularized logistic regression by gradient descent; a step that raises
// the loss is undone and the learning rate halved. When `loss_trace` is set
// it receives the objective after every iteration. Throws DegenerateLabels.
CalibrationModel TrainCalibration(const ScoreSet& scores,
                                  const std::vector<bool>& labels,
                                  const DurationMap& durations,
                                  const CalibrationOptions& options = {},
                                  std::vector<double>* loss_trace = nullptr);

// Throws UnknownUtterance when a duration is missing.
ScoreSet ApplyCalibration(const CalibrationModel& model, const ScoreSet& scores,
                          const DurationMap& durations);

// Header `w0 w1 w2 q_mean q_std` followed by one value line, tab-separated.
void WriteCalibrationModel(const CalibrationModel& model,
                           const std::string& path);
CalibrationModel ReadCalibrationModel(const std::string& path);

// Elementwise mean of score sets over the same trials. Throws
// AlignmentError when trial ids or counts differ, EmptyData on no input.
ScoreSet Fuse(const std::vector<ScoreSet>& score_sets);

}  // namespace sv

#endif  // SV_BACKEND_H_
