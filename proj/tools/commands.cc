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

#include "commands.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <unordered_set>

#include "sv/backend.h"
#include "sv/clustering.h"
#include "sv/corpus_io.h"
#include "sv/dsp.h"
#include "sv/embedder.h"
#include "sv/error.h"
#include "sv/metrics.h"
#include "sv/parallel.h"
#include "sv/pipeline.h"
#include "sv/random.h"
#include "sv/resunet.h"
#include "sv/synthetic.h"

namespace sv::cli {

namespace fs = std::filesystem;

namespace {

void RequireFile(const std::string& path, const char* what) {
  if (path.empty()) {
    throw Error(ErrorKind::kConfig, std::string("missing ") + what);
  }
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kIo, std::string(what) + " not found: " + path);
  }
}

void RequireValue(const std::string& value, const char* what) {
  if (value.empty()) {
    throw Error(ErrorKind::kConfig, std::string("missing ") + what);
  }
}

void MakeDirs(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir + ": " + ec.message());
}

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Audio paths in a manifest are relative to the manifest's directory.
std::string AudioPath(const std::string& manifest, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(manifest).parent_path() / p).string();
}

std::string FeaturePath(const std::string& dir, const std::string& id) {
  return Join(dir, id + ".fbk");
}

ResUnetConfig NetworkConfig(const RunConfig& config,
                            std::optional<int> variant) {
  ResUnetConfig c = config.resunet;
  if (variant) c.residual_blocks = *variant;
  c.Validate();
  return c;
}

ResUnet LoadNetwork(const ResUnetConfig& c, const std::string& checkpoint,
                    std::optional<std::uint64_t> init_seed,
                    std::uint64_t default_seed) {
  if (!checkpoint.empty() && init_seed) {
    throw Error(ErrorKind::kConfig,
                "--checkpoint and --init-seed are mutually exclusive");
  }
  if (!checkpoint.empty()) {
    RequireFile(checkpoint, "checkpoint");
    return LoadCheckpoint(checkpoint, c);
  }
  return ResUnet::Build(c, init_seed.value_or(default_seed));
}

PseudoLabelSet Cascade(const KMeansModel& model, int n_clusters, int min_count,
                       Linkage linkage) {
  return FilterMinCount(
      ComposePseudoLabels(model, Ahc(model.centers, n_clusters, linkage)),
      min_count);
}

void WriteLabels(const PseudoLabelSet& labels, const std::string& path,
                 std::ostream& out) {
  WritePseudoLabels(labels, path, path + ".removed");
  out << "n_speakers\t" << labels.n_speakers << '\n'
      << "labeled\t" << labels.ids.size() << '\n'
      << "removed\t" << labels.removed.size() << '\n';
}

void PrintReport(const RoundReport& r, std::ostream& out) {
  out << r.round << '\t' << r.n_clusters << '\t' << r.n_speakers << '\t'
      << FormatNumber(r.eer * 100.0) << '\t' << FormatNumber(r.min_dcf)
      << '\n';
}

}  // namespace

std::string FormatNumber(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, ptr);
  if (s.find_first_of(".enai") == std::string::npos) s += ".0";
  return s;
}

void ExtractFeatures(const RunConfig& config, const std::string& manifest_path,
                     const std::string& out_dir, std::ostream& out) {
  RequireFile(manifest_path, "manifest");
  RequireValue(out_dir, "output directory");
  const Manifest manifest = ReadManifest(manifest_path);
  manifest.Validate();
  MakeDirs(out_dir);
  ParallelFor(manifest.records.size(), config.workers, [&](std::size_t i) {
    const UtteranceRecord& r = manifest.records[i];
    FbankConfig fbank = config.fbank;
    fbank.dither_seed = DeriveSeed(config.seed, r.id, "dither");
    const Waveform wave = ReadWav(AudioPath(manifest_path, r.path));
    WriteFeatures(Cmn(Fbank(wave, fbank)), FeaturePath(out_dir, r.id));
  });
  out << "features\t" << manifest.records.size() << '\n';
}

void ExtractEmbeddings(const RunConfig& config, const EmbeddingJob& job,
                       std::ostream& out) {
  RequireFile(job.manifest, "manifest");
  RequireValue(job.feature_dir, "feature directory");
  RequireValue(job.out, "output embedding file");
  const ResUnetConfig net_config = NetworkConfig(config, job.variant);
  const ResUnet network =
      LoadNetwork(net_config, job.checkpoint, job.init_seed, config.seed);
  out << "residual_blocks\t" << net_config.residual_blocks << '\n'
      << "param_count\t" << ParamCount(net_config) << '\n';
  const Manifest manifest = ReadManifest(job.manifest);
  manifest.Validate();
  std::vector<std::vector<float>> rows(manifest.records.size());
  ParallelFor(rows.size(), config.workers, [&](std::size_t i) {
    rows[i] = network.Forward(
        ReadFeatures(FeaturePath(job.feature_dir, manifest.records[i].id)));
  });
  EmbeddingSet set(net_config.embed_dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    set.Add(manifest.records[i].id, rows[i]);
  }
  WriteEmbeddings(set, job.out);
  if (!job.save_checkpoint.empty()) SaveCheckpoint(network, job.save_checkpoint);
  out << "embeddings\t" << set.size() << '\n' << "dim\t" << set.dim() << '\n';
}

void MakeAugmentPlan(const std::string& manifest_path,
                     const AugmentAssets& assets, std::uint64_t seed,
                     const std::string& plan_out,
                     const std::string& expanded_out, std::ostream& out) {
  RequireFile(manifest_path, "manifest");
  RequireValue(plan_out, "plan output");
  const Manifest manifest = ReadManifest(manifest_path);
  manifest.Validate();
  const AugmentationPlan plan = BuildPlan(manifest, assets, seed);
  WritePlan(plan, plan_out);
  const Manifest expanded = ExpandManifest(manifest, plan);
  if (!expanded_out.empty()) WriteManifest(expanded, expanded_out);
  std::unordered_set<std::string> speakers;
  for (const auto& r : expanded.records) {
    if (r.speaker) speakers.insert(*r.speaker);
  }
  out << "plan_entries\t" << plan.entries.size() << '\n'
      << "utterances\t" << expanded.records.size() << '\n'
      << "speakers\t" << speakers.size() << '\n';
}

void Cluster(const ClusterJob& job, std::ostream& out) {
  RequireFile(job.embeddings, "embedding file");
  RequireValue(job.out_dir, "output directory");
  const EmbeddingSet set = L2Normalize(ReadEmbeddings(job.embeddings));
  KMeansOptions options;
  options.k = job.k;
  options.seed = job.seed;
  options.batch_size = job.batch_size;
  options.max_iters = job.max_iters;
  options.workers = job.workers;
  const KMeansModel model = MiniBatchKMeans(set, options);
  MakeDirs(job.out_dir);
  WriteKMeansModel(model, Join(job.out_dir, "centers.emb"),
                   Join(job.out_dir, "assignments.tsv"));
  out << "k\t" << model.k << '\n'
      << "iterations\t" << model.iterations << '\n'
      << "inertia\t" << FormatNumber(model.inertia) << '\n';
  if (job.n_clusters) {
    WriteLabels(Cascade(model, *job.n_clusters, job.min_count, job.linkage),
                Join(job.out_dir, "pseudo_labels.tsv"), out);
  }
}

void PseudoLabel(const std::string& kmeans_dir, int n_clusters, int min_count,
                 Linkage linkage, const std::string& labels_out,
                 std::ostream& out) {
  const std::string centers = Join(kmeans_dir, "centers.emb");
  const std::string assignments = Join(kmeans_dir, "assignments.tsv");
  RequireFile(centers, "k-means centers");
  RequireFile(assignments, "k-means assignments");
  RequireValue(labels_out, "label output");
  const KMeansModel model = ReadKMeansModel(centers, assignments);
  WriteLabels(Cascade(model, n_clusters, min_count, linkage), labels_out, out);
}

void Score(const std::string& embeddings, const std::string& trials,
           bool sub_mean, const std::string& pool, const std::string& scores_out,
           int workers, std::ostream& out) {
  RequireFile(embeddings, "embedding file");
  RequireFile(trials, "trial list");
  RequireValue(scores_out, "score output");
  EmbeddingSet set = ReadEmbeddings(embeddings);
  if (sub_mean) {
    if (pool.empty()) {
      set = SubMean(set, set);
    } else {
      RequireFile(pool, "sub-mean pool");
      set = SubMean(set, ReadEmbeddings(pool));
    }
  }
  const ScoreSet scores = ScoreTrials(set, ReadTrials(trials), workers);
  WriteScores(scores, scores_out);
  out << "scores\t" << scores.size() << '\n';
}

void Calibrate(const RunConfig& config, const CalibrateJob& job,
               std::ostream& out) {
  RequireFile(job.manifest, "duration manifest");
  const DurationMap durations = Durations(ReadManifest(job.manifest));
  CalibrationModel model;
  if (!job.train_scores.empty()) {
    RequireFile(job.train_scores, "training scores");
    RequireFile(job.train_trials, "training trials");
    const ScoreSet train = ReadScores(job.train_scores);
    model = TrainCalibration(train, AlignedLabels(train, ReadTrials(job.train_trials)),
                             durations, config.calibration);
    if (!job.model_out.empty()) WriteCalibrationModel(model, job.model_out);
  } else {
    RequireFile(job.model_in, "calibration model");
    model = ReadCalibrationModel(job.model_in);
  }
  out << "w0\t" << FormatNumber(model.w0) << '\n'
      << "w1\t" << FormatNumber(model.w1) << '\n'
      << "w2\t" << FormatNumber(model.w2) << '\n';
  if (!job.scores.empty()) {
    RequireFile(job.scores, "scores");
    RequireValue(job.scores_out, "calibrated score output");
    WriteScores(ApplyCalibration(model, ReadScores(job.scores), durations),
                job.scores_out);
  }
}

void FuseFiles(const std::vector<std::string>& inputs,
               const std::string& scores_out, std::ostream& out) {
  RequireValue(scores_out, "fused score output");
  std::vector<ScoreSet> sets;
  for (const auto& path : inputs) {
    RequireFile(path, "scores");
    sets.push_back(ReadScores(path));
  }
  const ScoreSet fused = Fuse(sets);
  WriteScores(fused, scores_out);
  out << "systems\t" << sets.size() << '\n' << "scores\t" << fused.size() << '\n';
}

void EvaluateFiles(const std::string& scores_path, const std::string& trials,
                   const DcfParams& dcf, std::ostream& out) {
  RequireFile(scores_path, "scores");
  RequireFile(trials, "trial list");
  dcf.Validate();
  const ScoreSet scores = ReadScores(scores_path);
  const Metrics m =
      Evaluate(scores.scores(), AlignedLabels(scores, ReadTrials(trials)), dcf);
  out << "eer_percent\t" << FormatNumber(m.eer * 100.0) << '\n'
      << "min_dcf\t" << FormatNumber(m.min_dcf) << '\n'
      << "p_target\t" << FormatNumber(dcf.p_target) << '\n'
      << "threshold\t" << FormatNumber(m.threshold) << '\n';
}

void Adapt(const RunConfig& config, const AdaptJob& job, std::ostream& out,
           std::ostream& err) {
  std::unique_ptr<Embedder> embedder;
  AdaptationCorpus corpus;
  TrialList validation;
  SpeakerMap truth;
  std::shared_ptr<const ResUnet> network;
  if (job.synthetic_demo) {
    SyntheticScenario scenario = MakeSyntheticScenario(config.synthetic);
    corpus = CorpusFromManifest(scenario.manifest);
    validation = std::move(scenario.validation);
    truth = std::move(scenario.truth);
    embedder = std::move(scenario.embedder);
  } else {
    RequireFile(job.manifest, "manifest");
    RequireValue(job.feature_dir, "feature directory");
    RequireFile(job.validation_trials, "validation trials");
    network = std::make_shared<const ResUnet>(LoadNetwork(
        NetworkConfig(config, std::nullopt), job.checkpoint, job.init_seed,
        config.seed));
    corpus = CorpusFromManifest(ReadManifest(job.manifest));
    validation = ReadTrials(job.validation_trials);
    embedder = std::make_unique<ResUnetEmbedder>(
        network, job.feature_dir,
        CropFrames(config.pipeline.stage1, config.fbank), config.seed);
  }
  if (!job.skip_stage1) {
    Stage1Result stage1 = Stage1JointAdapt(*embedder, corpus, config.pipeline);
    if (!stage1.losses.empty()) {
      err << "stage1 steps " << stage1.losses.size() << " first_loss "
          << FormatNumber(stage1.losses.front()) << " last_loss "
          << FormatNumber(stage1.losses.back()) << '\n';
    }
    embedder = std::move(stage1.embedder);
  }
  const ConvergenceResult result =
      RunUntilConverged(*embedder, corpus, validation, config.pipeline);
  out << "round\tn_clusters\tn_speakers\teer_percent\tmin_dcf\n";
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    PrintReport(result.reports[i], out);
    if (!truth.empty()) {
      err << "round " << result.reports[i].round << " purity "
          << FormatNumber(Purity(result.labels[i], truth)) << '\n';
    }
  }
  std::string log = job.log;
  if (log.empty() && !job.out_dir.empty()) log = Join(job.out_dir, "run_log.tsv");
  if (!job.out_dir.empty()) MakeDirs(job.out_dir);
  if (!log.empty()) WriteRunLog(result.reports, log);
  if (job.out_dir.empty()) return;

  // Final embedder state.
  const RowMatrix& w = result.embedder->projection();
  const Eigen::VectorXd& b = result.embedder->bias();
  if (network) {
    ResUnet adapted = *network;
    for (Param* p : adapted.Parameters()) {
      if (p->name == "head.weight") {
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          p->values[i] = static_cast<float>(w.data()[i]);
        }
      } else if (p->name == "head.bias") {
        for (Eigen::Index i = 0; i < b.size(); ++i) {
          p->values[i] = static_cast<float>(b[i]);
        }
      }
    }
    SaveCheckpoint(adapted, Join(job.out_dir, "adapted.ckpt"));
    return;
  }
  EmbeddingSet projection(static_cast<int>(w.cols()) + 1);
  std::vector<float> row(w.cols() + 1);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = static_cast<float>(w(r, c));
    row[w.cols()] = static_cast<float>(b[r]);
    projection.Add("row" + std::to_string(r), row);
  }
  WriteEmbeddings(projection, Join(job.out_dir, "projection.emb"));
  const auto* synthetic = dynamic_cast<const SyntheticEmbedder*>(result.embedder.get());
  if (synthetic) {
    const std::string path = Join(job.out_dir, "synthetic_state.tsv");
    std::ofstream os(path);
    os << "shift_angle_deg\t" << FormatNumber(synthetic->shift_angle_deg())
       << '\n'
       << "offset_scale\t" << FormatNumber(synthetic->offset_scale()) << '\n';
    if (!os) throw Error(ErrorKind::kIo, "write failed: " + path);
  }
}

}  // namespace sv::cli
