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

#include "sv/corpus_io.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_set>

#include "binary_io.h"
#include "sv/error.h"
#include "text_util.h"

namespace sv {

using internal::FormatDouble;
using internal::GetLe;
using internal::PutLe;
using internal::ParseErrorAt;

namespace {

constexpr char kManifestHeader[] = "id\tspeaker\tpath\tduration\tdomain\tlabeled";
constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint16_t kEmbeddingVersion = 1;

std::string DomainName(Domain d) {
  return d == Domain::kSource ? "source" : "target";
}

}  // namespace

void Manifest::Validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.id.empty()) throw Error(ErrorKind::kParse, "empty utterance id");
    if (!(r.duration > 0.0) || !std::isfinite(r.duration)) {
      throw Error(ErrorKind::kParse, "non-positive duration for " + r.id);
    }
    if (r.labeled && !r.speaker) {
      throw Error(ErrorKind::kParse, "labeled record without speaker: " + r.id);
    }
    if (r.speaker && r.speaker->empty()) {
      throw Error(ErrorKind::kParse, "empty speaker for " + r.id);
    }
    if (!seen.insert(r.id).second) {
      throw Error(ErrorKind::kDuplicateId, r.id);
    }
  }
}

Manifest ReadManifest(const std::string& path) {
  auto is = internal::OpenForRead(path);
  Manifest m;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view text = internal::StripCr(line);
    if (!header) {
      if (text != kManifestHeader) {
        throw ParseErrorAt(path, lineno, "bad manifest header");
      }
      header = true;
      continue;
    }
    if (text.empty()) continue;
    const auto f = internal::SplitTabs(text);
    if (f.size() != 6) throw ParseErrorAt(path, lineno, "expected 6 fields");
    UtteranceRecord r;
    r.id = std::string(f[0]);
    if (r.id.empty()) throw ParseErrorAt(path, lineno, "empty id");
    if (!f[1].empty()) r.speaker = std::string(f[1]);
    r.path = std::string(f[2]);
    const auto dur = internal::ParseDouble(f[3]);
    if (!dur || !(*dur > 0.0) || !std::isfinite(*dur)) {
      throw ParseErrorAt(path, lineno, "bad duration");
    }
    r.duration = *dur;
    if (f[4] == "source") {
      r.domain = Domain::kSource;
    } else if (f[4] == "target") {
      r.domain = Domain::kTarget;
    } else {
      throw ParseErrorAt(path, lineno, "bad domain");
    }
    if (f[5] == "1") {
      r.labeled = true;
    } else if (f[5] == "0") {
      r.labeled = false;
    } else {
      throw ParseErrorAt(path, lineno, "bad labeled flag");
    }
    if (r.labeled && !r.speaker) {
      throw ParseErrorAt(path, lineno, "labeled record without speaker");
    }
    if (!seen.insert(r.id).second) {
      throw Error(ErrorKind::kDuplicateId,
                  path + ":" + std::to_string(lineno) + ": " + r.id);
    }
    m.records.push_back(std::move(r));
  }
  if (!header) throw ParseErrorAt(path, 1, "missing manifest header");
  return m;
}

void WriteManifest(const Manifest& manifest, const std::string& path) {
  manifest.Validate();
  auto os = internal::OpenForWrite(path);
  os << kManifestHeader << '\n';
  for (const auto& r : manifest.records) {
    os << r.id << '\t' << r.speaker.value_or("") << '\t' << r.path << '\t'
       << FormatDouble(r.duration) << '\t' << DomainName(r.domain) << '\t'
       << (r.labeled ? '1' : '0') << '\n';
  }
  internal::FinishWrite(os, path);
}

TrialList ReadTrials(const std::string& path) {
  auto is = internal::OpenForRead(path);
  TrialList out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<bool> labeled;
  while (std::getline(is, line)) {
    ++lineno;
    const auto f = internal::SplitWhitespace(internal::StripCr(line));
    if (f.empty()) continue;
    Trial t;
    bool row_labeled = false;
    if (f.size() == 3) {
      if (f[0] != "1" && f[0] != "0") {
        throw ParseErrorAt(path, lineno, "label must be 1 or 0");
      }
      t.target = f[0] == "1";
      t.enroll = std::string(f[1]);
      t.test = std::string(f[2]);
      row_labeled = true;
    } else if (f.size() == 2) {
      t.enroll = std::string(f[0]);
      t.test = std::string(f[1]);
    } else {
      throw ParseErrorAt(path, lineno, "expected 2 or 3 fields");
    }
    if (labeled && *labeled != row_labeled) {
      throw ParseErrorAt(path, lineno, "mixed labeled and unlabeled trials");
    }
    labeled = row_labeled;
    out.trials.push_back(std::move(t));
  }
  return out;
}

void WriteTrials(const TrialList& trials, const std::string& path) {
  const bool labeled = trials.labeled();
  for (const auto& t : trials.trials) {
    if (t.target.has_value() != labeled) {
      throw Error(ErrorKind::kParse, "mixed labeled and unlabeled trials");
    }
  }
  auto os = internal::OpenForWrite(path);
  for (const auto& t : trials.trials) {
    if (labeled) os << (*t.target ? '1' : '0') << '\t';
    os << t.enroll << '\t' << t.test << '\n';
  }
  internal::FinishWrite(os, path);
}

std::vector<bool> TrialLabels(const TrialList& trials) {
  std::vector<bool> labels;
  labels.reserve(trials.size());
  for (const auto& t : trials.trials) {
    if (!t.target) throw Error(ErrorKind::kParse, "trial list is unlabeled");
    labels.push_back(*t.target);
  }
  return labels;
}

std::vector<double> ScoreSet::scores() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.score);
  return out;
}

ScoreSet ReadScores(const std::string& path) {
  auto is = internal::OpenForRead(path);
  ScoreSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto f = internal::SplitWhitespace(internal::StripCr(line));
    if (f.empty()) continue;
    if (f.size() != 3) throw ParseErrorAt(path, lineno, "expected 3 fields");
    const auto score = internal::ParseDouble(f[2]);
    if (!score || !std::isfinite(*score)) {
      throw ParseErrorAt(path, lineno, "bad score");
    }
    out.entries.push_back({std::string(f[0]), std::string(f[1]), *score});
  }
  return out;
}

void WriteScores(const ScoreSet& scores, const std::string& path) {
  auto os = internal::OpenForWrite(path);
  for (const auto& e : scores.entries) {
    if (!std::isfinite(e.score)) {
      throw Error(ErrorKind::kFormat, "non-finite score for trial " +
                                          e.enroll + " " + e.test);
    }
    os << e.enroll << '\t' << e.test << '\t' << FormatDouble(e.score) << '\n';
  }
  internal::FinishWrite(os, path);
}

EmbeddingSet::EmbeddingSet(int dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorKind::kShape, "embedding dim must be > 0");
}

void EmbeddingSet::Add(const std::string& id, std::span<const float> vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw Error(ErrorKind::kShape, "vector for " + id + " has " +
                                       std::to_string(vector.size()) +
                                       " components, expected " +
                                       std::to_string(dim_));
  }
  for (float v : vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNorm, "non-finite component in " + id);
    }
  }
  if (!index_.emplace(id, ids_.size()).second) {
    throw Error(ErrorKind::kDuplicateId, id);
  }
  ids_.push_back(id);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingSet::Find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingSet::at(const std::string& id) const {
  auto i = Find(id);
  if (!i) throw Error(ErrorKind::kUnknownUtterance, id);
  return row(*i);
}

bool EmbeddingSet::operator==(const EmbeddingSet& other) const {
  if (dim_ != other.dim_ || ids_ != other.ids_) return false;
  // Bitwise comparison so that -0.0 and NaN payloads are distinguished.
  return data_.size() == other.data_.size() &&
         std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(float)) == 0;
}

void WriteEmbeddings(const EmbeddingSet& set, const std::string& path) {
  if (set.dim() <= 0) throw Error(ErrorKind::kFormat, "embedding dim unset");
  auto os = internal::OpenForWrite(path, true);
  os.write(kEmbeddingMagic, 4);
  PutLe<std::uint16_t>(os, kEmbeddingVersion);
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(set.dim()));
  PutLe<std::uint64_t>(os, set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::string& id = set.id(i);
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorKind::kFormat, "id too long: " + id.substr(0, 32));
    }
    PutLe<std::uint16_t>(os, static_cast<std::uint16_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float v : set.row(i)) PutLe<float>(os, v);
  }
  internal::FinishWrite(os, path);
}

EmbeddingSet ReadEmbeddings(const std::string& path) {
  auto is = internal::OpenForRead(path, true);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kEmbeddingMagic, 4) != 0) {
    throw Error(ErrorKind::kFormat, "bad embedding magic in " + path);
  }
  std::uint16_t version = 0;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  if (!GetLe(is, &version) || version != kEmbeddingVersion) {
    throw Error(ErrorKind::kFormat, "unsupported embedding version in " + path);
  }
  if (!GetLe(is, &dim) || !GetLe(is, &count) || dim == 0) {
    throw Error(ErrorKind::kFormat, "bad embedding header in " + path);
  }
  EmbeddingSet set(static_cast<int>(dim));
  std::vector<float> vec(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint16_t len = 0;
    if (!GetLe(is, &len)) {
      throw Error(ErrorKind::kCorruptFile,
                  path + ": truncated at record " + std::to_string(i));
    }
    std::string id(len, '\0');
    if (!is.read(id.data(), len)) {
      throw Error(ErrorKind::kCorruptFile, path + ": truncated id");
    }
    for (auto& v : vec) {
      if (!GetLe(is, &v)) {
        throw Error(ErrorKind::kCorruptFile,
                    path + ": record " + id + " shorter than dim " +
                        std::to_string(dim));
      }
    }
    set.Add(id, vec);
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::kCorruptFile, path + ": trailing bytes after " +
                                             std::to_string(count) +
                                             " records");
  }
  return set;
}

DurationMap Durations(const Manifest& manifest) {
  DurationMap out;
  for (const auto& r : manifest.records) out[r.id] = r.duration;
  return out;
}

}  // namespace sv
