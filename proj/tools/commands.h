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

#ifndef SV_TOOLS_COMMANDS_H_
#define SV_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.h"
#include "sv/augment.h"

namespace sv::cli {

// Each command reads its inputs, writes its outputs and reports key/value
// lines on `out`. Failures surface as sv::Error.

void ExtractFeatures(const RunConfig& config, const std::string& manifest,
                     const std::string& out_dir, std::ostream& out);

struct EmbeddingJob {
  std::string manifest;
  std::string feature_dir;
  std::string out;
  std::optional<int> variant;
  std::optional<std::uint64_t> init_seed;
  std::string checkpoint;
  std::string save_checkpoint;
};
void ExtractEmbeddings(const RunConfig& config, const EmbeddingJob& job,
                       std::ostream& out);

void MakeAugmentPlan(const std::string& manifest, const AugmentAssets& assets,
                     std::uint64_t seed, const std::string& plan_out,
                     const std::string& expanded_out, std::ostream& out);

struct ClusterJob {
  std::string embeddings;
  std::string out_dir;
  int k = 0;
  int batch_size = 4096;
  int max_iters = 100;
  std::uint64_t seed = 0;
  std::optional<int> n_clusters;
  int min_count = 10;
  Linkage linkage = Linkage::kAverage;
  int workers = 1;
};
void Cluster(const ClusterJob& job, std::ostream& out);

void PseudoLabel(const std::string& kmeans_dir, int n_clusters, int min_count,
                 Linkage linkage, const std::string& labels_out,
                 std::ostream& out);

void Score(const std::string& embeddings, const std::string& trials,
           bool sub_mean, const std::string& pool, const std::string& scores_out,
           int workers, std::ostream& out);

struct CalibrateJob {
  std::string train_scores;
  std::string train_trials;
  std::string manifest;  // durations
  std::string model_out;
  std::string model_in;
  std::string scores;
  std::string scores_out;
};
void Calibrate(const RunConfig& config, const CalibrateJob& job,
               std::ostream& out);

void FuseFiles(const std::vector<std::string>& inputs,
               const std::string& scores_out, std::ostream& out);

void EvaluateFiles(const std::string& scores, const std::string& trials,
                   const DcfParams& dcf, std::ostream& out);

struct AdaptJob {
  bool synthetic_demo = false;
  bool skip_stage1 = false;
  std::string log;
  std::string out_dir;
  // Real-data mode.
  std::string manifest;
  std::string feature_dir;
  std::string validation_trials;
  std::string checkpoint;
  std::optional<std::uint64_t> init_seed;
};
void Adapt(const RunConfig& config, const AdaptJob& job, std::ostream& out,
           std::ostream& err);

// Shortest round-trip decimal that always shows a fractional part.
std::string FormatNumber(double value);

}  // namespace sv::cli

#endif  // SV_TOOLS_COMMANDS_H_
