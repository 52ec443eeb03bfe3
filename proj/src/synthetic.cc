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

#include "sv/synthetic.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "sv/error.h"
#include "sv/random.h"

namespace sv {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

std::string Name(const char* prefix, int speaker, int utt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%03d-utt%03d", prefix, speaker, utt);
  return buf;
}

std::string SpeakerName(const char* prefix, int speaker) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, speaker);
  return buf;
}

// |N(0, sigma)| redrawn until it does not exceed `max`.
double FoldedNormal(double sigma, double max, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, sigma);
  while (true) {
    const double v = std::abs(gauss(rng));
    if (v <= max) return v;
  }
}

Eigen::VectorXd GaussianVector(int dim, double stddev, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, stddev);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  return v;
}

}  // namespace

RowMatrix SeparatedDirections(int count, int dim, double min_angle_deg,
                              std::uint64_t seed) {
  if (count < 1 || dim < 2) {
    throw Error(ErrorKind::kConfig, "need count >= 1 and dim >= 2");
  }
  const double max_cos = std::cos(min_angle_deg * kDegree);
  Rng rng(seed);
  RowMatrix out(count, dim);
  constexpr int kMaxAttempts = 10000;
  for (int i = 0; i < count; ++i) {
    int attempt = 0;
    while (true) {
      if (++attempt > kMaxAttempts) {
        throw Error(ErrorKind::kConfig,
                    "cannot place " + std::to_string(count) +
                        " directions " + std::to_string(min_angle_deg) +
                        " degrees apart in " + std::to_string(dim) + " dims");
      }
      const Eigen::VectorXd v = GaussianVector(dim, 1.0, rng).normalized();
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) ok = out.row(j).dot(v) <= max_cos;
      if (ok) {
        out.row(i) = v.transpose();
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd Perturb(const Eigen::VectorXd& mean, double angle, Rng& rng) {
  Eigen::VectorXd u = GaussianVector(static_cast<int>(mean.size()), 1.0, rng);
  u -= u.dot(mean) * mean;
  return std::cos(angle) * mean + std::sin(angle) * u.normalized();
}

EmbeddingSet PlantedPartition(int speakers, int utts, int dim,
                              double intra_sigma_deg, double intra_max_deg,
                              double min_inter_deg, std::uint64_t seed,
                              SpeakerMap* truth) {
  const RowMatrix means =
      SeparatedDirections(speakers, dim, min_inter_deg, DeriveSeed(seed, "means"));
  EmbeddingSet out(dim);
  std::vector<float> row(dim);
  for (int s = 0; s < speakers; ++s) {
    const Eigen::VectorXd mean = means.row(s).transpose();
    for (int u = 0; u < utts; ++u) {
      const std::string id = Name("spk", s, u);
      Rng rng(DeriveSeed(seed, id));
      const double angle =
          FoldedNormal(intra_sigma_deg, intra_max_deg, rng) * kDegree;
      const Eigen::VectorXd v = Perturb(mean, angle, rng);
      for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(v[j]);
      out.Add(id, row);
      if (truth) (*truth)[id] = SpeakerName("spk", s);
    }
  }
  return out;
}

SyntheticEmbedder::SyntheticEmbedder(
    const SyntheticOptions& options, RowMatrix speaker_means,
    std::unordered_map<std::string, Utterance> utterances)
    : Embedder(RowMatrix::Identity(options.dim, options.dim),
               Eigen::VectorXd::Zero(options.dim)),
      options_(options),
      speaker_means_(std::move(speaker_means)),
      shift_angle_deg_(options.shift_angle_deg),
      offset_scale_(options.offset_scale) {
  Rng rng(DeriveSeed(options.seed, "offset"));
  offset_direction_ = GaussianVector(options.dim, 1.0, rng).normalized();
  if (options.nuisance_rank < 0 || options.nuisance_rank > options.dim) {
    throw Error(ErrorKind::kConfig, "nuisance_rank must lie in [0, dim]");
  }
  if (options.nuisance_rank > 0) {
    Rng basis_rng(DeriveSeed(options.seed, "nuisance"));
    Eigen::MatrixXd g(options.dim, options.nuisance_rank);
    for (int j = 0; j < options.nuisance_rank; ++j) {
      g.col(j) = GaussianVector(options.dim, 1.0, basis_rng);
    }
    const Eigen::MatrixXd q = g.householderQr().householderQ() *
                              Eigen::MatrixXd::Identity(options.dim,
                                                        options.nuisance_rank);
    nuisance_basis_ = q.transpose();
  }
  for (const auto& [id, u] : utterances) pool_size_ += u.adaptation_pool;
  utterances_ = std::make_shared<const std::unordered_map<std::string, Utterance>>(
      std::move(utterances));
}

Eigen::VectorXd SyntheticEmbedder::Representation(const std::string& id,
                                                  int view) const {
  auto it = utterances_->find(id);
  if (it == utterances_->end()) {
    throw Error(ErrorKind::kUnknownUtterance, "unknown utterance " + id);
  }
  const Utterance& u = it->second;
  Rng rng(DeriveSeed(options_.seed, id, "utt"));
  const double sigma = options_.intra_sigma_deg;
  Eigen::VectorXd x =
      Perturb(speaker_means_.row(u.speaker).transpose(),
              FoldedNormal(sigma, 2.0 * sigma, rng) * kDegree, rng);
  Eigen::VectorXd nuisance;
  if (nuisance_basis_.rows() > 0) {
    const int r = static_cast<int>(nuisance_basis_.rows());
    nuisance = nuisance_basis_.transpose() *
               GaussianVector(r, options_.nuisance_scale / std::sqrt(double(r)),
                              rng);
  } else {
    nuisance = GaussianVector(
        options_.dim, options_.nuisance_scale / std::sqrt(double(options_.dim)),
        rng);
  }
  if (view != 0) {
    Rng view_rng(DeriveSeed(options_.seed, id, "view" + std::to_string(view)));
    const double vs = options_.view_sigma_deg;
    x = Perturb(x, FoldedNormal(vs, 2.0 * vs, view_rng) * kDegree, view_rng);
  }
  if (!u.target_domain) return x;
  const double alpha = shift_angle_deg_ * kDegree;
  return std::cos(alpha) * x - std::sin(alpha) * nuisance +
         offset_scale_ * offset_direction_;
}

std::unique_ptr<Embedder> SyntheticEmbedder::Clone() const {
  return std::make_unique<SyntheticEmbedder>(*this);
}

double SyntheticEmbedder::PseudoLabelQuality(const LabeledIds& data) const {
  std::map<int, std::map<int, long>> by_label;    // label -> speaker -> n
  std::map<int, std::map<int, long>> by_speaker;  // speaker -> label -> n
  long labeled = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = utterances_->find(data.ids[i]);
    if (it == utterances_->end() || !it->second.adaptation_pool) continue;
    ++by_label[data.labels[i]][it->second.speaker];
    ++by_speaker[it->second.speaker][data.labels[i]];
    ++labeled;
  }
  if (labeled == 0 || pool_size_ == 0) return 0.0;
  auto majority_sum = [](const std::map<int, std::map<int, long>>& table) {
    long sum = 0;
    for (const auto& [key, counts] : table) {
      long best = 0;
      for (const auto& [other, n] : counts) best = std::max(best, n);
      sum += best;
    }
    return static_cast<double>(sum);
  };
  const double purity = majority_sum(by_label) / labeled;
  // Utterances dropped by filtering count against inverse purity.
  const double inverse = majority_sum(by_speaker) / pool_size_;
  return 2.0 * purity * inverse / (purity + inverse);
}

std::unique_ptr<Embedder> SyntheticEmbedder::Adapt(
    const LabeledIds& data, const TrainPhaseConfig& config,
    const AdaptOptions& options) const {
  auto out = std::make_unique<SyntheticEmbedder>(*this);
  out->TrainProjection(data, config, options);
  const double factor = 1.0 - (1.0 - options_.shrink) * PseudoLabelQuality(data);
  out->shift_angle_deg_ *= factor;
  out->offset_scale_ *= factor;
  return out;
}

SyntheticScenario MakeSyntheticScenario(const SyntheticOptions& options) {
  if (options.shrink < 0.0 || options.shrink > 1.0) {
    throw Error(ErrorKind::kConfig, "shrink must be in [0, 1]");
  }
  struct Group {
    const char* prefix;
    int speakers;
    int utts;
    Domain domain;
    bool labeled;
    bool in_manifest;
  };
  const Group groups[] = {
      {"src", options.source_speakers, options.source_utts, Domain::kSource,
       true, true},
      {"tgt", options.target_speakers, options.target_utts, Domain::kTarget,
       false, true},
      {"lab", options.labeled_target_speakers, options.labeled_target_utts,
       Domain::kTarget, true, true},
      {"val", options.validation_speakers, options.validation_utts,
       Domain::kTarget, true, false},
  };
  int total_speakers = 0;
  for (const Group& g : groups) total_speakers += g.speakers;
  RowMatrix means = SeparatedDirections(total_speakers, options.dim,
                                        options.min_inter_deg,
                                        DeriveSeed(options.seed, "means"));
  SyntheticScenario scenario;
  std::unordered_map<std::string, SyntheticEmbedder::Utterance> utterances;
  std::vector<std::pair<std::string, int>> validation;
  int speaker_base = 0;
  for (const Group& g : groups) {
    for (int s = 0; s < g.speakers; ++s) {
      const std::string speaker = SpeakerName(g.prefix, s);
      for (int u = 0; u < g.utts; ++u) {
        const std::string id = Name(g.prefix, s, u);
        const int index = speaker_base + s;
        utterances[id] = {index, g.domain == Domain::kTarget,
                          g.domain == Domain::kTarget && !g.labeled};
        scenario.truth[id] = speaker;
        if (!g.in_manifest) {
          validation.emplace_back(id, index);
          continue;
        }
        Rng rng(DeriveSeed(options.seed, id, "duration"));
        const double duration =
            std::round(std::uniform_real_distribution<double>(2.0, 10.0)(rng) *
                       100.0) /
            100.0;
        UtteranceRecord record;
        record.id = id;
        if (g.labeled) record.speaker = speaker;
        record.path = "synthetic/" + id + ".wav";
        record.duration = duration;
        record.domain = g.domain;
        record.labeled = g.labeled;
        scenario.manifest.records.push_back(std::move(record));
      }
    }
    speaker_base += g.speakers;
  }
  for (std::size_t i = 0; i < validation.size(); ++i) {
    for (std::size_t j = i + 1; j < validation.size(); ++j) {
      scenario.validation.trials.push_back(
          {validation[i].first, validation[j].first,
           validation[i].second == validation[j].second});
    }
  }
  scenario.embedder = std::make_unique<SyntheticEmbedder>(
      options, std::move(means), std::move(utterances));
  return scenario;
}

}  // namespace sv
