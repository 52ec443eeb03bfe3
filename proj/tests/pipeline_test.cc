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
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "scenarios.h"
#include "sv/pipeline.h"
#include "sv/synthetic.h"
#include "test_util.h"

namespace sv {
namespace {

using testing::ThrownKind;

SyntheticOptions SmallScenario(std::uint64_t seed = 1) {
  SyntheticOptions o;
  o.dim = 32;
  o.source_speakers = 10;
  o.source_utts = 10;
  o.target_speakers = 10;
  o.target_utts = 20;
  o.labeled_target_speakers = 3;
  o.labeled_target_utts = 6;
  o.validation_speakers = 8;
  o.validation_utts = 6;
  o.seed = seed;
  return o;
}

PipelineConfig SmallPipeline(std::uint64_t seed = 1) {
  PipelineConfig c;
  c.kmeans_k = 60;
  c.ahc_candidates = {5, 10, 20};
  c.min_count = 5;
  c.kmeans_batch_size = 128;
  c.stage1_steps = 60;
  c.adapt_steps = 20;
  c.stage1.lr0 = 1e-3;
  c.stage1.margin_start = c.stage1.margin_end;
  c.stage1.batch_size = 32;
  c.adaptation.batch_size = 32;
  c.seed = seed;
  return c;
}

RoundReport Report(int n, double eer_percent, double min_dcf = 0.5) {
  return {1, n, n, eer_percent / 100.0, min_dcf};
}

TEST_CASE("cluster-count selection on the published sweep") {
  const std::map<int, double> table = {
      {1000, 11.28}, {2000, 10.90}, {3000, 11.00}, {4000, 11.34}};
  std::vector<int> seen;
  const Selection s = SelectBest({1000, 2000, 3000, 4000}, [&](int n) {
    seen.push_back(n);
    return Report(n, table.at(n));
  });
  CHECK(s.best_n == 2000);
  CHECK(s.best_index == 1);
  CHECK(seen == std::vector<int>{1000, 2000, 3000, 4000});
  REQUIRE(s.reports.size() == 4);
  CHECK(s.reports[3].n_clusters == 4000);
  // Order of the candidates does not matter.
  CHECK(SelectBest({4000, 3000, 1000, 2000},
                   [&](int n) { return Report(n, table.at(n)); })
            .best_n == 2000);
}

TEST_CASE("selection ties go to lower MinDCF, then fewer clusters") {
  auto same_eer = [](int n) { return Report(n, 5.0, n == 30 ? 0.2 : 0.3); };
  CHECK(SelectBest({10, 20, 30}, same_eer).best_n == 30);
  auto full_tie = [](int n) { return Report(n, 5.0, 0.3); };
  CHECK(SelectBest({30, 10, 20}, full_tie).best_n == 10);
  CHECK(ThrownKind([&] { SelectBest({}, full_tie); }) == ErrorKind::kConfig);
}

TEST_CASE("stopping rule") {
  PipelineConfig c;
  c.max_rounds = 5;
  c.converge_epsilon = 0.002;
  std::vector<RoundReport> r = {Report(1, 9.24)};
  CHECK(!ShouldStop(r, c));
  r.push_back(Report(1, 9.07));
  CHECK(ShouldStop(r, c));  // 0.17 points < 0.2 points
  c.converge_epsilon = 0.001;
  CHECK(!ShouldStop(r, c));
  r.push_back(Report(1, 9.5));
  CHECK(ShouldStop(r, c));  // got worse
  c.max_rounds = 3;
  r = {Report(1, 30.0), Report(1, 20.0), Report(1, 10.0)};
  CHECK(ShouldStop(r, c));
  r.pop_back();
  CHECK(!ShouldStop(r, c));
}

TEST_CASE("run log round trip") {
  testing::TempDir dir;
  const std::vector<RoundReport> r = {{1, 2000, 1874, 0.0924, 0.51},
                                      {2, 2000, 1901, 0.0907, 0.4975}};
  WriteRunLog(r, dir.File("log.tsv"));
  const std::string text = testing::ReadFile(dir.File("log.tsv"));
  CHECK(text.rfind("round\tn_clusters\tn_speakers\teer_percent\tmin_dcf\n", 0) == 0);
  CHECK(text.find("\t9.24\t") != std::string::npos);
  const auto back = ReadRunLog(dir.File("log.tsv"));
  REQUIRE(back.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back[i].round == r[i].round);
    CHECK(back[i].n_clusters == r[i].n_clusters);
    CHECK(back[i].n_speakers == r[i].n_speakers);
    CHECK(back[i].eer == doctest::Approx(r[i].eer).epsilon(1e-15));
    CHECK(back[i].min_dcf == r[i].min_dcf);
  }
}

TEST_CASE("corpus streams from a manifest") {
  const SyntheticScenario s = MakeSyntheticScenario(SmallScenario());
  const AdaptationCorpus c = CorpusFromManifest(s.manifest);
  CHECK(c.source.size() == 100);
  CHECK(c.source.n_classes == 10);
  CHECK(c.target_unlabeled.size() == 200);
  CHECK(c.target_labeled.size() == 18);
  CHECK(c.target_labeled.n_classes == 3);
  for (std::size_t i = 0; i < c.source.size(); ++i) {
    // Speaker names sort in index order, so labels follow the name.
    CHECK(c.source.labels[i] == std::stoi(c.source.ids[i].substr(3, 3)));
  }
  CHECK(s.validation.size() == 48u * 47u / 2u);
}

TEST_CASE("union inventory offsets pseudo-speakers past source classes") {
  LabeledIds source{{"a", "b", "c"}, {0, 1, 1}, 2};
  PseudoLabelSet pseudo;
  pseudo.ids = {"x", "y"};
  pseudo.labels = {1, 0};
  pseudo.n_speakers = 2;
  const LabeledIds u = UnionInventory(source, pseudo);
  CHECK(u.ids == std::vector<std::string>{"a", "b", "c", "x", "y"});
  CHECK(u.labels == std::vector<int>{0, 1, 1, 3, 2});
  CHECK(u.n_classes == 4);
}

TEST_CASE("synthetic embedder contract") {
  SyntheticOptions o = SmallScenario();
  const SyntheticScenario s = MakeSyntheticScenario(o);
  const SyntheticEmbedder& e = *s.embedder;
  CHECK(e.Representation("tgt003-utt004", 0) == e.Representation("tgt003-utt004", 0));
  CHECK(e.Representation("tgt003-utt004", 1) != e.Representation("tgt003-utt004", 0));
  CHECK(ThrownKind([&] { e.Representation("nobody", 0); }) ==
        ErrorKind::kUnknownUtterance);

  const AdaptationCorpus c = CorpusFromManifest(s.manifest);
  LabeledIds truth;
  std::map<std::string, int> index;
  for (const auto& id : c.target_unlabeled) {
    const auto it = index.try_emplace(s.truth.at(id), int(index.size())).first;
    truth.ids.push_back(id);
    truth.labels.push_back(it->second);
  }
  truth.n_classes = int(index.size());
  CHECK(e.PseudoLabelQuality(truth) == 1.0);
  AdaptOptions opts;
  opts.steps = 5;
  auto adapted = e.Adapt(truth, TrainPhaseConfig::Defaults(
                                    TrainPhase::kAdaptationFinetune, Track::kTrack1),
                         opts);
  const auto& a = dynamic_cast<const SyntheticEmbedder&>(*adapted);
  CHECK(a.shift_angle_deg() == o.shift_angle_deg * o.shrink);
  CHECK(a.offset_scale() == o.offset_scale * o.shrink);
  CHECK(e.shift_angle_deg() == o.shift_angle_deg);

  // One label for everything: purity 1/10, so almost no shrinkage.
  LabeledIds lumped = truth;
  std::fill(lumped.labels.begin(), lumped.labels.end(), 0);
  lumped.n_classes = 1;
  CHECK(e.PseudoLabelQuality(lumped) < 0.2);
}

TEST_CASE("evaluation scores centered cosine similarities") {
  const SyntheticScenario s = MakeSyntheticScenario(SmallScenario());
  const PipelineConfig c = SmallPipeline();
  std::set<std::string> ids;
  for (const auto& t : s.validation.trials) {
    ids.insert(t.enroll);
    ids.insert(t.test);
  }
  const std::vector<std::string> list(ids.begin(), ids.end());
  const EmbeddingSet raw = s.embedder->ExtractAll(list);
  const ScoreSet scores = ScoreTrials(SubMean(raw, raw), s.validation);
  const Metrics expected =
      Evaluate(scores.scores(), TrialLabels(s.validation), c.dcf);
  const Metrics m = EvaluateEmbedder(*s.embedder, s.validation, c);
  CHECK(m.eer == expected.eer);
  CHECK(m.min_dcf == expected.min_dcf);
}

TEST_CASE("clustering an unshifted target domain recovers its speakers") {
  SyntheticOptions o = SmallScenario();
  o.shift_angle_deg = 0.0;
  o.offset_scale = 0.0;
  const SyntheticScenario s = MakeSyntheticScenario(o);
  const AdaptationCorpus c = CorpusFromManifest(s.manifest);
  const PseudoLabelSet p =
      ClusterTargets(*s.embedder, c.target_unlabeled, 10, SmallPipeline(), 1);
  CHECK(p.n_speakers == 10);
  CHECK(Purity(p, s.truth) >= 0.95);
}

TEST_CASE("stage-1 joint training lowers the joint loss") {
  const SyntheticScenario s = MakeSyntheticScenario(SmallScenario());
  const AdaptationCorpus c = CorpusFromManifest(s.manifest);
  const Stage1Result r = Stage1JointAdapt(*s.embedder, c, SmallPipeline());
  REQUIRE(r.losses.size() == 60);
  const double head = std::accumulate(r.losses.begin(), r.losses.begin() + 10, 0.0);
  const double tail = std::accumulate(r.losses.end() - 10, r.losses.end(), 0.0);
  CHECK(tail < head);
  CHECK(r.embedder->projection() != s.embedder->projection());

  AdaptationCorpus no_labels = c;
  no_labels.target_labeled = {};
  CHECK(ThrownKind([&] { Stage1JointAdapt(*s.embedder, no_labels, SmallPipeline()); }) ==
        ErrorKind::kEmptyData);
}

TEST_CASE("a round reports its clustering and improves the target domain") {
  const SyntheticScenario s = MakeSyntheticScenario(SmallScenario());
  const AdaptationCorpus c = CorpusFromManifest(s.manifest);
  const PipelineConfig cfg = SmallPipeline();
  const Metrics before = EvaluateEmbedder(*s.embedder, s.validation, cfg);
  const RoundResult r = RunRound(*s.embedder, c, s.validation, cfg, 1, 10);
  CHECK(r.report.round == 1);
  CHECK(r.report.n_clusters == 10);
  CHECK(r.report.n_speakers == r.labels.n_speakers);
  CHECK(r.report.eer < before.eer);
  const RoundResult again = RunRound(*s.embedder, c, s.validation, cfg, 1, 10);
  CHECK(again.report == r.report);
  CHECK(again.embedder->projection() == r.embedder->projection());
  // Requests beyond k are clamped.
  const RoundResult big = RunRound(*s.embedder, c, s.validation, cfg, 1, 500);
  CHECK(big.report.n_clusters == 60);
}

TEST_CASE("iterating rounds stops by the rule and is deterministic") {
  const SyntheticScenario s = MakeSyntheticScenario(SmallScenario(3));
  const AdaptationCorpus c = CorpusFromManifest(s.manifest);
  PipelineConfig cfg = SmallPipeline(3);
  const ConvergenceResult r = RunUntilConverged(*s.embedder, c, s.validation, cfg);
  REQUIRE(!r.reports.empty());
  CHECK(int(r.reports.size()) <= cfg.max_rounds);
  CHECK(ShouldStop(r.reports, cfg));
  for (std::size_t n = 1; n < r.reports.size(); ++n) {
    const std::vector<RoundReport> prefix(r.reports.begin(), r.reports.begin() + n);
    CHECK(!ShouldStop(prefix, cfg));
  }
  for (const auto& rep : r.reports) CHECK(rep.n_clusters == r.n_clusters);
  CHECK(std::count(cfg.ahc_candidates.begin(), cfg.ahc_candidates.end(),
                   r.n_clusters) == 1);
  CHECK(r.labels.size() == r.reports.size());
  const ConvergenceResult again = RunUntilConverged(*s.embedder, c, s.validation, cfg);
  CHECK(again.reports == r.reports);

  cfg.workers = 3;
  const ConvergenceResult threaded = RunUntilConverged(*s.embedder, c, s.validation, cfg);
  CHECK(threaded.reports == r.reports);
}

TEST_CASE("fusing calibrated complementary systems beats each system") {
  const auto sc = testing::MakeFusionScenario(7);
  const FusionResult f = FuseSystems(sc.systems, sc.calibration_labels,
                                     sc.evaluation_labels, sc.durations);
  REQUIRE(f.calibrated.size() == 2);
  for (int sys = 0; sys < 2; ++sys) {
    const double raw = Eer(sc.systems[sys].evaluation.scores(), sc.evaluation_labels);
    const double cal = Eer(f.calibrated[sys].scores(), sc.evaluation_labels);
    CHECK(f.metrics.eer < raw);
    CHECK(f.metrics.eer < cal);
  }
  CHECK(f.fused == Fuse(f.calibrated));
  CHECK(f.metrics.eer == Eer(f.fused.scores(), sc.evaluation_labels));
}

TEST_CASE("pipeline configuration validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.Validate());
  c.min_count = 0;
  CHECK(ThrownKind([&] { c.Validate(); }) == ErrorKind::kConfig);
  c = PipelineConfig{};
  c.ahc_candidates = {};
  CHECK(ThrownKind([&] { c.Validate(); }) == ErrorKind::kConfig);
}

}  // namespace
}  // namespace sv
