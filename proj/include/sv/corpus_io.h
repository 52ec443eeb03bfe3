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

#ifndef SV_CORPUS_IO_H_
#define SV_CORPUS_IO_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace sv {

enum class Domain { kSource, kTarget };

struct UtteranceRecord {
  std::string id;
  std::optional<std::string> speaker;
  std::string path;
  double duration = 0.0;  // seconds
  Domain domain = Domain::kSource;
  bool labeled = false;

  bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
  std::vector<UtteranceRecord> records;

  // Throws DuplicateId / ParseError when an invariant is broken.
  void Validate() const;

  bool operator==(const Manifest&) const = default;
};

// Tab-separated, header `id speaker path duration domain labeled`. An empty
// speaker field means the speaker is absent.
Manifest ReadManifest(const std::string& path);
void WriteManifest(const Manifest& manifest, const std::string& path);

struct Trial {
  std::string enroll;
  std::string test;
  std::optional<bool> target;

  bool operator==(const Trial&) const = default;
};

struct TrialList {
  std::vector<Trial> trials;

  bool labeled() const {
    return !trials.empty() && trials.front().target.has_value();
  }
  std::size_t size() const { return trials.size(); }

  bool operator==(const TrialList&) const = default;
};

// One trial per line: `[1|0] enroll test`. Either every line carries the
// label column or none does.
TrialList ReadTrials(const std::string& path);
void WriteTrials(const TrialList& trials, const std::string& path);

struct ScoreEntry {
  std::string enroll;
  std::string test;
  double score = 0.0;

  bool operator==(const ScoreEntry&) const = default;
};

struct ScoreSet {
  std::vector<ScoreEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::vector<double> scores() const;

  bool operator==(const ScoreSet&) const = default;
};

// One score per line: `enroll test score`.
ScoreSet ReadScores(const std::string& path);
void WriteScores(const ScoreSet& scores, const std::string& path);

// Labels of a labeled trial list as 0/1 flags; throws ParseError when the
// list is unlabeled.
std::vector<bool> TrialLabels(const TrialList& trials);

// Fixed-dimension vectors keyed by utterance id, stored row-major.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  // Throws DuplicateId, ShapeError (wrong length) or NormError (non-finite).
  void Add(const std::string& id, std::span<const float> vector);

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<float> mutable_row(std::size_t i) {
    return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  const std::vector<float>& data() const { return data_; }

  std::optional<std::size_t> Find(const std::string& id) const;
  // Throws UnknownUtterance when absent.
  std::span<const float> at(const std::string& id) const;

  bool operator==(const EmbeddingSet& other) const;

 private:
  int dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary layout, little-endian: magic `EMB1`, u16 version (1), u32 dim,
// u64 count, then per record u16 id length, id bytes, dim x f32.
EmbeddingSet ReadEmbeddings(const std::string& path);
void WriteEmbeddings(const EmbeddingSet& set, const std::string& path);

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;
};

// 16 kHz, 16-bit PCM, mono RIFF WAV only.
Waveform ReadWav(const std::string& path);
// Samples are clipped to [-1, 1] and quantized as round(x * 32768) clamped
// to the int16 range.
void WriteWav(const Waveform& wave, const std::string& path);

// Map from utterance id to duration in seconds.
using DurationMap = std::unordered_map<std::string, double>;
DurationMap Durations(const Manifest& manifest);

}  // namespace sv

#endif  // SV_CORPUS_IO_H_
