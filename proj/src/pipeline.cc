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

#include "sv/pipeline.h"

#include <cmath>
#include <map>
#include <random>
#include <unordered_set>

#include "binary_io.h"
#include "sv/error.h"
#include "sv/losses.h"
#include "sv/random.h"
#include "text_util.h"

namespace sv {

namespace {

constexpr char kRunLogHeader[] =
    "round\tn_clusters\tn_speakers\teer_percent\tmin_dcf";

LabeledIds DenseLabels(const std::vector<const UtteranceRecord*>& records) {
  std::map<std::string, int> classes;
  for (const auto* r : records) classes.emplace(*r->speaker, 0);
  int next = 0;
  for (auto& [name, index] : classes) index = next++;
  LabeledIds out;
  out.n_classes = next;
  for (const auto* r : records) {
    out.ids.push_back(r->id);
    out.labels.push_back(classes.at(*r->speaker));
  }
  return out;
}

// Gathers rows `picks` of a representation matrix.
RowMatrix Rows(const RowMatrix& m, const std::vector<std::size_t>& picks) {
  RowMatrix out(picks.size(), m.cols());
  for (std::size_t i = 0; i < picks.size(); ++i) out.row(i) = m.row(picks[i]);
  return out;
}

std::vector<int> Labels(const LabeledIds& data,
                        const std::vector<std::size_t>& picks) {
  std::vector<int> out(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) out[i] = data.labels[picks[i]];
  return out;
}

}  // namespace

AdaptationCorpus CorpusFromManifest(const Manifest& manifest) {
  manifest.Validate();
  std::vector<const UtteranceRecord*> source, target_labeled;
  AdaptationCorpus corpus;
  for (const auto& r : manifest.records) {
    if (r.domain == Domain::kSource) {
      if (r.labeled) source.push_back(&r);
    } else if (r.labeled) {
      target_labeled.push_back(&r);
    } else {
      corpus.target_unlabeled.push_back(r.id);
    }
  }
  corpus.source = DenseLabels(source);
  corpus.target_labeled = DenseLabels(target_labeled);
  return corpus;
}

void PipelineConfig::Validate() const {
  if (ahc_candidates.empty()) {
    throw Error(ErrorKind::kConfig, "ahc_candidates must not be empty");
  }
  for (int n : ahc_candidates) {
    if (n < 1) throw Error(ErrorKind::kConfig, "cluster counts must be >= 1");
  }
  if (max_rounds < 1) throw Error(ErrorKind::kConfig, "max_rounds must be >= 1");
  if (kmeans_k < 1) throw Error(ErrorKind::kConfig, "kmeans_k must be >= 1");
  if (min_count < 1) throw Error(ErrorKind::kConfig, "min_count must be >= 1");
  if (num_subcenters < 1) {
    throw Error(ErrorKind::kConfig, "num_subcenters must be >= 1");
  }
  if (triplet_views < 2) {
    throw Error(ErrorKind::kConfig, "triplet_views must be >= 2");
  }
  if (!(converge_epsilon >= 0.0)) {
    throw Error(ErrorKind::kConfig, "converge_epsilon must be >= 0");
  }
  stage1.Validate();
  adaptation.Validate();
  dcf.Validate();
}

void WriteRunLog(const std::vector<RoundReport>& reports,
                 const std::string& path) {
  using internal::FormatDouble;
  auto os = internal::OpenForWrite(path);
  os << kRunLogHeader << '\n';
  for (const auto& r : reports) {
    os << r.round << '\t' << r.n_clusters << '\t' << r.n_speakers << '\t'
       << FormatDouble(r.eer * 100.0) << '\t' << FormatDouble(r.min_dcf)
       << '\n';
  }
  internal::FinishWrite(os, path);
}

std::vector<RoundReport> ReadRunLog(const std::string& path) {
  auto is = internal::OpenForRead(path);
  std::string line;
  if (!std::getline(is, line) ||
      internal::StripCr(line) != std::string_view(kRunLogHeader)) {
    throw internal::ParseErrorAt(path, 1, "bad run log header");
  }
  std::vector<RoundReport> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    const auto f = internal::SplitTabs(internal::StripCr(line));
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 5) throw internal::ParseErrorAt(path, lineno, "expected 5 fields");
    const auto round = internal::ParseInt<int>(f[0]);
    const auto n = internal::ParseInt<int>(f[1]);
    const auto spk = internal::ParseInt<int>(f[2]);
    const auto eer = internal::ParseDouble(f[3]);
    const auto dcf = internal::ParseDouble(f[4]);
    if (!round || !n || !spk || !eer || !dcf) {
      throw internal::ParseErrorAt(path, lineno, "bad value");
    }
    out.push_back({*round, *n, *spk, *eer / 100.0, *dcf});
  }
  return out;
}

Stage1Result Stage1JointAdapt(const Embedder& embedder,
                              const AdaptationCorpus& corpus,
                              const PipelineConfig& config) {
  config.Validate();
  if (corpus.source.empty() || corpus.target_unlabeled.size() < 2 ||
      corpus.target_labeled.empty()) {
    throw Error(ErrorKind::kEmptyData,
                "stage 1 needs labeled source data, two or more unlabeled "
                "target utterances and labeled target data");
  }
  Stage1Result result;
  result.embedder = embedder.Clone();
  Embedder& model = *result.embedder;
  if (config.stage1_steps <= 0) return result;

  const TrainPhaseConfig& phase = config.stage1;
  const RowMatrix h_source =
      model.Representations(corpus.source.ids, 0, config.workers);
  const RowMatrix h_labeled =
      model.Representations(corpus.target_labeled.ids, 0, config.workers);
  ClassifierHead source_head =
      MeanInitializedHead(model.Project(h_source), corpus.source, 1,
                          DeriveSeed(config.seed, "stage1_source_head"));
  ClassifierHead target_head =
      MeanInitializedHead(model.Project(h_labeled), corpus.target_labeled, 1,
                          DeriveSeed(config.seed, "stage1_target_head"));
  source_head.scale = target_head.scale = phase.scale;

  Rng rng(DeriveSeed(config.seed, "stage1"));
  const int batch = phase.batch_size;
  auto draw = [&](std::size_t n) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> out(batch);
    for (auto& i : out) i = pick(rng);
    return out;
  };
  std::uniform_int_distribution<int> view(1, config.triplet_views);
  const auto& pool = corpus.target_unlabeled;
  std::uniform_int_distribution<std::size_t> pick_pool(0, pool.size() - 1);
  const int rep = model.representation_dim();

  for (int step = 0; step < config.stage1_steps; ++step) {
    const auto src = draw(corpus.source.size());
    const auto lab = draw(corpus.target_labeled.size());
    RowMatrix h_anchor(batch, rep), h_positive(batch, rep), h_negative(batch, rep);
    for (int b = 0; b < batch; ++b) {
      const std::size_t a = pick_pool(rng);
      std::size_t n = pick_pool(rng);
      while (n == a) n = pick_pool(rng);
      const int va = view(rng);
      int vp = view(rng);
      while (vp == va) vp = view(rng);
      const int vn = view(rng);
      h_anchor.row(b) = model.Representation(pool[a], va).transpose();
      h_positive.row(b) = model.Representation(pool[a], vp).transpose();
      h_negative.row(b) = model.Representation(pool[n], vn).transpose();
    }
    const RowMatrix hs = Rows(h_source, src);
    const RowMatrix hl = Rows(h_labeled, lab);

    const double margin = MarginAt(
        phase, EpochProgress(step, batch, static_cast<long>(corpus.source.size())));
    source_head.margin = target_head.margin = margin;
    const double lr = LrAt(phase, step);

    const JointLossOutput out = JointLoss(
        {model.Project(hs), Labels(corpus.source, src)},
        {model.Project(h_anchor), model.Project(h_positive),
         model.Project(h_negative)},
        {model.Project(hl), Labels(corpus.target_labeled, lab)}, source_head,
        target_head, config.triplet_margin);

    RowMatrix h_all(5 * batch, rep);
    h_all << hs, h_anchor, h_positive, h_negative, hl;
    RowMatrix g_all(5 * batch, model.dim());
    g_all << out.grad_source, out.grad_anchor, out.grad_positive,
        out.grad_negative, out.grad_target;
    model.ProjectionStep(h_all, g_all, lr, phase.weight_decay);
    SgdStep(source_head.weights, out.grad_source_head, lr, phase.weight_decay);
    SgdStep(target_head.weights, out.grad_target_head, lr, phase.weight_decay);
    result.losses.push_back(out.loss);
  }
  return result;
}

Metrics EvaluateEmbedder(const Embedder& embedder, const TrialList& trials,
                         const PipelineConfig& config) {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& t : trials.trials) {
    for (const auto* id : {&t.enroll, &t.test}) {
      if (seen.insert(*id).second) ids.push_back(*id);
    }
  }
  const EmbeddingSet raw = embedder.ExtractAll(ids, config.workers);
  const EmbeddingSet centered = SubMean(raw, raw);
  const ScoreSet scores = ScoreTrials(centered, trials, config.workers);
  return Evaluate(scores.scores(), TrialLabels(trials), config.dcf);
}

PseudoLabelSet ClusterTargets(const Embedder& embedder,
                              const std::vector<std::string>& ids,
                              int n_clusters, const PipelineConfig& config,
                              int round) {
  const EmbeddingSet unit =
      L2Normalize(embedder.ExtractAll(ids, config.workers));
  KMeansOptions options;
  options.k = std::min<int>(config.kmeans_k, static_cast<int>(unit.size()));
  options.seed = DeriveSeed(config.seed, "kmeans" + std::to_string(round));
  options.batch_size = config.kmeans_batch_size;
  options.max_iters = config.kmeans_max_iters;
  options.workers = config.workers;
  const KMeansModel model = MiniBatchKMeans(unit, options);
  const int n = std::min(n_clusters, model.k);
  const std::vector<int> center_labels = Ahc(model.centers, n, config.linkage);
  return FilterMinCount(ComposePseudoLabels(model, center_labels),
                        config.min_count);
}

LabeledIds UnionInventory(const LabeledIds& source,
                          const PseudoLabelSet& pseudo) {
  LabeledIds out = source;
  for (std::size_t i = 0; i < pseudo.ids.size(); ++i) {
    out.ids.push_back(pseudo.ids[i]);
    out.labels.push_back(source.n_classes + pseudo.labels[i]);
  }
  out.n_classes = source.n_classes + pseudo.n_speakers;
  return out;
}

RoundResult RunRound(const Embedder& embedder, const AdaptationCorpus& corpus,
                     const TrialList& validation, const PipelineConfig& config,
                     int round, int n_clusters) {
  config.Validate();
  if (corpus.target_unlabeled.empty()) {
    throw Error(ErrorKind::kEmptyData, "no unlabeled target utterances");
  }
  const int k = std::min<int>(config.kmeans_k,
                              static_cast<int>(corpus.target_unlabeled.size()));
  RoundResult result;
  result.labels = ClusterTargets(embedder, corpus.target_unlabeled, n_clusters,
                                 config, round);
  AdaptOptions options;
  options.steps = config.adapt_steps;
  options.num_subcenters = config.num_subcenters;
  options.seed = DeriveSeed(config.seed, "adapt" + std::to_string(round));
  options.workers = config.workers;
  result.embedder = embedder.Adapt(UnionInventory(corpus.source, result.labels),
                                   config.adaptation, options);
  const Metrics m = EvaluateEmbedder(*result.embedder, validation, config);
  result.report = {round, std::min(n_clusters, k), result.labels.n_speakers,
                   m.eer, m.min_dcf};
  return result;
}

Selection SelectBest(const std::vector<int>& candidates,
                     const std::function<RoundReport(int)>& evaluate) {
  if (candidates.empty()) {
    throw Error(ErrorKind::kConfig, "no cluster-count candidates");
  }
  Selection out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.reports.push_back(evaluate(candidates[i]));
    const RoundReport& r = out.reports.back();
    const RoundReport& best = out.reports[out.best_index];
    const bool better =
        r.eer < best.eer ||
        (r.eer == best.eer &&
         (r.min_dcf < best.min_dcf ||
          (r.min_dcf == best.min_dcf &&
           candidates[i] < candidates[out.best_index])));
    if (i == 0 || better) out.best_index = i;
  }
  out.best_n = candidates[out.best_index];
  return out;
}

SelectionResult SelectClusterCount(const Embedder& embedder,
                                   const AdaptationCorpus& corpus,
                                   const TrialList& validation,
                                   const PipelineConfig& config, int round) {
  std::vector<RoundResult> results;
  SelectionResult out;
  out.selection = SelectBest(config.ahc_candidates, [&](int n) {
    results.push_back(RunRound(embedder, corpus, validation, config, round, n));
    return results.back().report;
  });
  out.best = std::move(results[out.selection.best_index]);
  return out;
}

bool ShouldStop(const std::vector<RoundReport>& reports,
                const PipelineConfig& config) {
  if (static_cast<int>(reports.size()) >= config.max_rounds) return true;
  if (reports.size() < 2) return false;
  const double improvement =
      reports[reports.size() - 2].eer - reports.back().eer;
  return improvement < config.converge_epsilon;
}

ConvergenceResult RunUntilConverged(const Embedder& embedder,
                                    const AdaptationCorpus& corpus,
                                    const TrialList& validation,
                                    const PipelineConfig& config) {
  config.Validate();
  ConvergenceResult out;
  std::unique_ptr<Embedder> current = embedder.Clone();
  for (int round = 1;; ++round) {
    RoundResult r;
    if (round == 1 || config.reselect_each_round) {
      SelectionResult s =
          SelectClusterCount(*current, corpus, validation, config, round);
      out.n_clusters = s.selection.best_n;
      r = std::move(s.best);
    } else {
      r = RunRound(*current, corpus, validation, config, round, out.n_clusters);
    }
    out.reports.push_back(r.report);
    out.labels.push_back(std::move(r.labels));
    current = std::move(r.embedder);
    if (ShouldStop(out.reports, config)) break;
  }
  out.embedder = std::move(current);
  return out;
}

FusionResult FuseSystems(const std::vector<SystemScores>& systems,
                         const std::vector<bool>& calibration_labels,
                         const std::vector<bool>& evaluation_labels,
                         const DurationMap& durations,
                         const CalibrationOptions& options,
                         const DcfParams& dcf) {
  if (systems.empty()) throw Error(ErrorKind::kEmptyData, "no systems to fuse");
  FusionResult out;
  for (const auto& s : systems) {
    out.models.push_back(
        TrainCalibration(s.calibration, calibration_labels, durations, options));
    out.calibrated.push_back(
        ApplyCalibration(out.models.back(), s.evaluation, durations));
  }
  out.fused = Fuse(out.calibrated);
  out.metrics = Evaluate(out.fused.scores(), evaluation_labels, dcf);
  return out;
}

}  // namespace sv
