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

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>

#include "binary_io.h"
#include "sv/clustering.h"
#include "sv/error.h"
#include "text_util.h"

namespace sv {

using internal::ParseErrorAt;

namespace {

// Maps every used value to its rank among the used values.
std::vector<int> DenseRanks(const std::vector<int>& values, int* count) {
  std::vector<int> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
        sorted.begin());
  }
  *count = static_cast<int>(sorted.size());
  return out;
}

void CheckLabelSet(const PseudoLabelSet& labels) {
  if (labels.ids.size() != labels.labels.size()) {
    throw Error(ErrorKind::kShape, "pseudo-label ids and labels differ in size");
  }
}

}  // namespace

PseudoLabelSet ComposePseudoLabels(const KMeansModel& kmeans,
                                   const std::vector<int>& center_labels) {
  if (static_cast<int>(center_labels.size()) != kmeans.k) {
    throw Error(ErrorKind::kShape,
                "center label count " + std::to_string(center_labels.size()) +
                    " != k " + std::to_string(kmeans.k));
  }
  PseudoLabelSet out;
  out.ids = kmeans.ids;
  std::vector<int> raw(kmeans.assignments.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int c = kmeans.assignments[i];
    if (c < 0 || c >= kmeans.k) {
      throw Error(ErrorKind::kShape, "assignment out of range for " +
                                         kmeans.ids[i]);
    }
    raw[i] = center_labels[c];
  }
  out.labels = DenseRanks(raw, &out.n_speakers);
  return out;
}

PseudoLabelSet FilterMinCount(const PseudoLabelSet& labels, int min_count) {
  CheckLabelSet(labels);
  if (min_count < 1) throw Error(ErrorKind::kConfig, "min_count must be >= 1");
  std::unordered_map<int, int> counts;
  for (int l : labels.labels) ++counts[l];
  PseudoLabelSet out;
  out.removed = labels.removed;
  std::vector<int> kept;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    if (counts[labels.labels[i]] >= min_count) {
      out.ids.push_back(labels.ids[i]);
      kept.push_back(labels.labels[i]);
    } else {
      out.removed.push_back(labels.ids[i]);
    }
  }
  if (out.ids.empty()) {
    throw Error(ErrorKind::kEmptyResult,
                "no pseudo-speaker has " + std::to_string(min_count) +
                    " or more utterances");
  }
  out.labels = DenseRanks(kept, &out.n_speakers);
  return out;
}

double Purity(const PseudoLabelSet& labels,
              const std::unordered_map<std::string, std::string>& truth) {
  CheckLabelSet(labels);
  if (labels.ids.empty()) return 0.0;
  std::map<int, std::map<std::string, long>> table;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    auto it = truth.find(labels.ids[i]);
    if (it == truth.end()) {
      throw Error(ErrorKind::kUnknownUtterance,
                  "no true speaker for " + labels.ids[i]);
    }
    ++table[labels.labels[i]][it->second];
  }
  long majority = 0;
  for (const auto& [label, speakers] : table) {
    long best = 0;
    for (const auto& [speaker, n] : speakers) best = std::max(best, n);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(labels.ids.size());
}

void WritePseudoLabels(const PseudoLabelSet& labels, const std::string& path,
                       const std::string& removed_path) {
  CheckLabelSet(labels);
  auto os = internal::OpenForWrite(path);
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    os << labels.ids[i] << '\t' << labels.labels[i] << '\n';
  }
  internal::FinishWrite(os, path);
  auto rs = internal::OpenForWrite(removed_path);
  for (const auto& id : labels.removed) rs << id << '\n';
  internal::FinishWrite(rs, removed_path);
}

PseudoLabelSet ReadPseudoLabels(const std::string& path,
                                const std::string& removed_path) {
  PseudoLabelSet out;
  auto is = internal::OpenForRead(path);
  std::string line;
  std::size_t lineno = 0;
  int max_label = -1;
  while (std::getline(is, line)) {
    ++lineno;
    const auto f = internal::SplitWhitespace(internal::StripCr(line));
    if (f.empty()) continue;
    if (f.size() != 2) throw ParseErrorAt(path, lineno, "expected 2 fields");
    const auto label = internal::ParseInt<int>(f[1]);
    if (!label || *label < 0) throw ParseErrorAt(path, lineno, "bad label");
    out.ids.emplace_back(f[0]);
    out.labels.push_back(*label);
    max_label = std::max(max_label, *label);
  }
  std::vector<char> used(max_label + 1, 0);
  for (int l : out.labels) used[l] = 1;
  if (std::find(used.begin(), used.end(), 0) != used.end()) {
    throw Error(ErrorKind::kFormat, path + ": labels are not dense");
  }
  out.n_speakers = max_label + 1;
  auto rs = internal::OpenForRead(removed_path);
  while (std::getline(rs, line)) {
    const auto f = internal::SplitWhitespace(internal::StripCr(line));
    if (!f.empty()) out.removed.emplace_back(f[0]);
  }
  return out;
}

void WriteKMeansModel(const KMeansModel& model, const std::string& centers_path,
                      const std::string& assignments_path) {
  EmbeddingSet centers(static_cast<int>(model.centers.cols()));
  std::vector<float> row(model.centers.cols());
  for (int c = 0; c < model.k; ++c) {
    for (Eigen::Index j = 0; j < model.centers.cols(); ++j) {
      row[j] = static_cast<float>(model.centers(c, j));
    }
    centers.Add("c" + std::to_string(c), row);
  }
  WriteEmbeddings(centers, centers_path);
  auto os = internal::OpenForWrite(assignments_path);
  for (std::size_t i = 0; i < model.ids.size(); ++i) {
    os << model.ids[i] << '\t' << model.assignments[i] << '\n';
  }
  internal::FinishWrite(os, assignments_path);
}

KMeansModel ReadKMeansModel(const std::string& centers_path,
                            const std::string& assignments_path) {
  const EmbeddingSet centers = ReadEmbeddings(centers_path);
  KMeansModel model;
  model.k = static_cast<int>(centers.size());
  model.centers.resize(model.k, centers.dim());
  for (int c = 0; c < model.k; ++c) {
    if (centers.id(c) != "c" + std::to_string(c)) {
      throw Error(ErrorKind::kFormat,
                  centers_path + ": unexpected center id " + centers.id(c));
    }
    const auto row = centers.row(c);
    for (int j = 0; j < centers.dim(); ++j) model.centers(c, j) = row[j];
  }
  auto is = internal::OpenForRead(assignments_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto f = internal::SplitWhitespace(internal::StripCr(line));
    if (f.empty()) continue;
    if (f.size() != 2) {
      throw ParseErrorAt(assignments_path, lineno, "expected 2 fields");
    }
    const auto c = internal::ParseInt<int>(f[1]);
    if (!c || *c < 0 || *c >= model.k) {
      throw ParseErrorAt(assignments_path, lineno, "bad center index");
    }
    model.ids.emplace_back(f[0]);
    model.assignments.push_back(*c);
  }
  return model;
}

}  // namespace sv
