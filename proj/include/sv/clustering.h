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

#ifndef SV_CLUSTERING_H_
#define SV_CLUSTERING_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <string_view>
#include <vector>

#include "sv/corpus_io.h"
#include "sv/matrix.h"

namespace sv {

struct KMeansOptions {
  int k = 20000;
  std::uint64_t seed = 0;
  int batch_size = 4096;
  int max_iters = 100;
  double tol = 1e-4;
  int workers = 1;
};

struct KMeansModel {
  int k = 0;
  RowMatrix centers;                 // k x d
  std::vector<std::string> ids;      // input order
  std::vector<int> assignments;      // aligned with ids
  double inertia = 0.0;              // sum of squared distances
  int iterations = 0;
};

// Mini-batch k-means over unit-norm rows: k-means++ seeding on a
// subsample of min(10 k, n) points, per-center running-mean updates,
// a final full assignment pass and reseeding of empty centers. Ties go to
// the lowest center index. Throws TooFewPoints / NormError.
KMeansModel MiniBatchKMeans(const EmbeddingSet& embeddings,
                            const KMeansOptions& options);

// Nearest center of every row, lowest index on ties.
std::vector<int> AssignNearest(const RowMatrix& points, const RowMatrix& centers,
                               int workers = 1);

double Inertia(const RowMatrix& points, const RowMatrix& centers,
               const std::vector<int>& assignments);

enum class Linkage { kSingle, kComplete, kAverage };
Linkage ParseLinkage(std::string_view name);

// Agglomerative clustering of the rows under cosine distance, merging the
// closest pair (lowest index pair on ties) until n_clusters remain. Rows are
// unweighted. Labels are numbered by first appearance. Throws ConfigError.
std::vector<int> Ahc(const RowMatrix& centers, int n_clusters,
                     Linkage linkage = Linkage::kAverage);

struct PseudoLabelSet {
  std::vector<std::string> ids;  // surviving utterances, input order
  std::vector<int> labels;       // aligned with ids, dense in [0, n_speakers)
  int n_speakers = 0;
  std::vector<std::string> removed;
};

// label(id) = center_labels[assignment(id)]. Label values that are used are
// renumbered densely in increasing order, so identity center labels over a
// model without empty centers reproduce the assignments.
PseudoLabelSet ComposePseudoLabels(const KMeansModel& kmeans,
                                   const std::vector<int>& center_labels);

// Drops pseudo-speakers with fewer than min_count members and renumbers the
// survivors preserving their relative order. Throws EmptyResult.
PseudoLabelSet FilterMinCount(const PseudoLabelSet& labels, int min_count);

// Fraction of utterances whose pseudo-speaker's majority true speaker
// matches their own.
double Purity(const PseudoLabelSet& labels,
              const std::unordered_map<std::string, std::string>& truth);

// `utt_id pseudo_speaker` lines; removed ids one per line in a sidecar.
void WritePseudoLabels(const PseudoLabelSet& labels, const std::string& path,
                       const std::string& removed_path);
PseudoLabelSet ReadPseudoLabels(const std::string& path,
                                const std::string& removed_path);

// k-means model files: centers as an embedding file with ids c0..c{k-1},
// assignments as `utt_id center` lines.
void WriteKMeansModel(const KMeansModel& model, const std::string& centers_path,
                      const std::string& assignments_path);
KMeansModel ReadKMeansModel(const std::string& centers_path,
                            const std::string& assignments_path);

}  // namespace sv

#endif  // SV_CLUSTERING_H_
