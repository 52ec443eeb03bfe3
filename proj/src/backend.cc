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

#include "sv/backend.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "sv/error.h"
#include "sv/parallel.h"

namespace sv {

double Cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kShape, "cosine of vectors of different length");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::kNorm, "cosine of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingSet L2Normalize(const EmbeddingSet& set) {
  EmbeddingSet out(set.dim());
  std::vector<float> v(set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.row(i);
    double norm = 0.0;
    for (float x : row) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      throw Error(ErrorKind::kNorm, "zero embedding for " + set.id(i));
    }
    for (int j = 0; j < set.dim(); ++j) {
      v[j] = static_cast<float>(row[j] / norm);
    }
    out.Add(set.id(i), v);
  }
  return out;
}

EmbeddingSet SubMean(const EmbeddingSet& set, const EmbeddingSet& pool) {
  if (set.dim() != pool.dim()) {
    throw Error(ErrorKind::kShape, "sub-mean pool has a different dimension");
  }
  if (pool.empty()) throw Error(ErrorKind::kEmptyData, "empty sub-mean pool");
  const int dim = pool.dim();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto row = pool.row(i);
    for (int j = 0; j < dim; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(pool.size());
  EmbeddingSet out(dim);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.row(i);
    for (int j = 0; j < dim; ++j) {
      v[j] = static_cast<float>(row[j] - mean[j]);
    }
    out.Add(set.id(i), v);
  }
  return out;
}

ScoreSet ScoreTrials(const EmbeddingSet& embeddings, const TrialList& trials,
                     int workers) {
  ScoreSet out;
  out.entries.resize(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    // Resolve ids up front so the error is raised on the first bad trial.
    embeddings.at(trials.trials[i].enroll);
    embeddings.at(trials.trials[i].test);
  }
  ParallelFor(trials.size(), workers, [&](std::size_t i) {
    const Trial& t = trials.trials[i];
    out.entries[i] = {t.enroll, t.test,
                      Cosine(embeddings.at(t.enroll), embeddings.at(t.test))};
  });
  return out;
}

std::vector<bool> AlignedLabels(const ScoreSet& scores,
                                const TrialList& trials) {
  if (scores.size() != trials.size()) {
    throw Error(ErrorKind::kAlignment,
                std::to_string(scores.size()) + " scores for " +
                    std::to_string(trials.size()) + " trials");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores.entries[i].enroll != trials.trials[i].enroll ||
        scores.entries[i].test != trials.trials[i].test) {
      throw Error(ErrorKind::kAlignment,
                  "score and trial lists disagree at line " +
                      std::to_string(i + 1));
    }
  }
  return TrialLabels(trials);
}

namespace {

// Draws `m` distinct values from [0, n) (Floyd's algorithm), ascending.
std::vector<std::uint64_t> SampleWithoutReplacement(std::uint64_t n,
                                                    std::uint64_t m, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m);
  for (std::uint64_t j = n - m; j < n; ++j) {
    const std::uint64_t t =
        std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Pairs (a, b), a < b, where b ranges over [lo(a), hi(a)); pair indices are
// enumerated by a and then b.
struct PairSpace {
  std::vector<std::uint64_t> offsets;  // offsets[a] = pairs before row a
  std::vector<std::size_t> lo;

  std::uint64_t size() const { return offsets.back(); }

  std::pair<std::size_t, std::size_t> At(std::uint64_t index) const {
    const auto it =
        std::upper_bound(offsets.begin(), offsets.end(), index) - 1;
    const std::size_t a = it - offsets.begin();
    return {a, lo[a] + static_cast<std::size_t>(index - *it)};
  }
};

}  // namespace

TrialList MakeCalibrationTrials(const Manifest& labeled, Rng& rng,
                                std::uint64_t n_target,
                                std::uint64_t n_nontarget) {
  std::map<std::string, std::vector<std::string>> by_speaker;
  for (const auto& r : labeled.records) {
    if (r.speaker) by_speaker[*r.speaker].push_back(r.id);
  }
  int eligible = 0;
  for (const auto& [spk, ids] : by_speaker) eligible += ids.size() >= 2;
  if (eligible < 2) {
    throw Error(ErrorKind::kNotEnoughData,
                "calibration trials need 2 speakers with 2 utterances each");
  }
  std::vector<const std::string*> utts;
  std::vector<std::size_t> group_end;
  for (const auto& [spk, ids] : by_speaker) {
    const std::size_t end = utts.size() + ids.size();
    for (const auto& id : ids) {
      utts.push_back(&id);
      group_end.push_back(end);
    }
  }
  const std::size_t n = utts.size();
  PairSpace same, cross;
  same.offsets.assign(1, 0);
  cross.offsets.assign(1, 0);
  for (std::size_t a = 0; a < n; ++a) {
    same.lo.push_back(a + 1);
    same.offsets.push_back(same.offsets.back() + (group_end[a] - a - 1));
    cross.lo.push_back(group_end[a]);
    cross.offsets.push_back(cross.offsets.back() + (n - group_end[a]));
  }
  if (n_target > same.size() || n_nontarget > cross.size()) {
    throw Error(ErrorKind::kNotEnoughData,
                "requested " + std::to_string(n_target) + " target / " +
                    std::to_string(n_nontarget) + " non-target trials, " +
                    std::to_string(same.size()) + " / " +
                    std::to_string(cross.size()) + " available");
  }
  TrialList out;
  for (const auto& [space, target] :
       {std::pair{&same, true}, std::pair{&cross, false}}) {
    const auto picks = SampleWithoutReplacement(
        space->size(), target ? n_target : n_nontarget, rng);
    for (std::uint64_t p : picks) {
      const auto [a, b] = space->At(p);
      out.trials.push_back({*utts[a], *utts[b], target});
    }
  }
  return out;
}

ScoreSet Fuse(const std::vector<ScoreSet>& score_sets) {
  if (score_sets.empty()) throw Error(ErrorKind::kEmptyData, "nothing to fuse");
  const ScoreSet& first = score_sets.front();
  for (const auto& s : score_sets) {
    if (s.size() != first.size()) {
      throw Error(ErrorKind::kAlignment, "score sets differ in length");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.entries[i].enroll != first.entries[i].enroll ||
          s.entries[i].test != first.entries[i].test) {
        throw Error(ErrorKind::kAlignment,
                    "score sets disagree at trial " + std::to_string(i + 1));
      }
    }
  }
  ScoreSet out = first;
  const double n = static_cast<double>(score_sets.size());
  std::vector<double> column(score_sets.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < score_sets.size(); ++j) {
      column[j] = score_sets[j].entries[i].score;
    }
    // Summing in sorted order makes the mean independent of input order;
    // identical inputs are passed through untouched.
    std::sort(column.begin(), column.end());
    if (column.front() == column.back()) continue;
    double sum = 0.0;
    for (double v : column) sum += v;
    out.entries[i].score = sum / n;
  }
  return out;
}

}  // namespace sv
