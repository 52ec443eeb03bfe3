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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "run_config.h"
#include "sv/error.h"

namespace sv::cli {
namespace {

template <typename T>
void Override(const CLI::Option* option, const T& value, T* field) {
  if (option->count() > 0) *field = value;
}

template <typename T>
std::optional<T> IfGiven(const CLI::Option* option, const T& value) {
  return option->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

std::string Or(const std::string& flag, const std::string& fallback) {
  return flag.empty() ? fallback : flag;
}

int Main(int argc, char** argv) {
  CLI::App app{"Speaker verification with self-supervised domain adaptation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 1;
  app.add_option("--config", config_path, "TOML-style run configuration")
      ->envname(kConfigEnvVar);
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Global random seed");
  CLI::Option* workers_opt =
      app.add_option("--workers", workers, "Threads for data-parallel stages");

  // extract-features
  std::string manifest, out_dir, out;
  CLI::App* features = app.add_subcommand(
      "extract-features", "Log-Mel filterbank + CMN feature files");
  features->add_option("--manifest", manifest, "Utterance manifest");
  features->add_option("--out-dir", out_dir, "Feature output directory");

  // extract-embeddings
  EmbeddingJob emb;
  int variant = 15;
  std::uint64_t init_seed = 0;
  CLI::App* embeddings =
      app.add_subcommand("extract-embeddings", "ResUnet embeddings");
  embeddings->add_option("--manifest", emb.manifest, "Utterance manifest");
  embeddings->add_option("--feature-dir", emb.feature_dir,
                         "Directory of <id>.fbk files");
  embeddings->add_option("--out", emb.out, "Embedding file");
  CLI::Option* variant_opt =
      embeddings->add_option("--variant", variant, "Residual depth")
          ->check(CLI::IsMember({9, 12, 15, 18, 21}));
  CLI::Option* init_opt = embeddings->add_option(
      "--init-seed", init_seed, "Build a fresh network from this seed");
  embeddings->add_option("--checkpoint", emb.checkpoint, "Network checkpoint");
  embeddings->add_option("--save-checkpoint", emb.save_checkpoint,
                         "Write the network used");

  // augment-plan
  AugmentAssets assets;
  std::string expanded;
  CLI::App* augment =
      app.add_subcommand("augment-plan", "Nine-way augmentation plan");
  augment->add_option("--manifest", manifest, "Utterance manifest");
  augment->add_option("--noise", assets.noise, "Noise recordings");
  augment->add_option("--music", assets.music, "Music recordings");
  augment->add_option("--babble", assets.babble, "Babble recordings");
  augment->add_option("--rir", assets.rir, "Room impulse responses");
  augment->add_option("--out", out, "Plan TSV");
  augment->add_option("--expanded-manifest", expanded,
                      "Manifest of the augmented copies");

  // cluster
  ClusterJob cj;
  int n_clusters = 0;
  std::string linkage = "average";
  CLI::App* cluster =
      app.add_subcommand("cluster", "Mini-batch k-means (+ optional AHC)");
  cluster->add_option("--embeddings", cj.embeddings, "Embedding file");
  cluster->add_option("--out-dir", cj.out_dir, "Output directory");
  CLI::Option* k_opt = cluster->add_option("--k", cj.k, "Number of centers");
  CLI::Option* batch_opt =
      cluster->add_option("--batch-size", cj.batch_size, "Mini-batch size");
  CLI::Option* iters_opt =
      cluster->add_option("--max-iters", cj.max_iters, "Iteration cap");
  CLI::Option* cluster_n_opt = cluster->add_option(
      "--n-clusters", n_clusters, "AHC cluster count (writes pseudo labels)");
  CLI::Option* cluster_min_opt =
      cluster->add_option("--min-count", cj.min_count, "Minimum speaker size");
  CLI::Option* cluster_link_opt =
      cluster->add_option("--linkage", linkage, "single|complete|average");

  // pseudo-label
  std::string kmeans_dir;
  int min_count = 10;
  CLI::App* pseudo =
      app.add_subcommand("pseudo-label", "AHC over k-means centers + filter");
  pseudo->add_option("--kmeans-dir", kmeans_dir, "Output of `cluster`");
  CLI::Option* pseudo_n_opt =
      pseudo->add_option("--n-clusters", n_clusters, "AHC cluster count");
  CLI::Option* pseudo_min_opt =
      pseudo->add_option("--min-count", min_count, "Minimum speaker size");
  CLI::Option* pseudo_link_opt =
      pseudo->add_option("--linkage", linkage, "single|complete|average");
  pseudo->add_option("--out", out, "Pseudo-label TSV");

  // score
  std::string emb_path, trials, pool;
  bool sub_mean = false;
  CLI::App* score = app.add_subcommand("score", "Cosine trial scoring");
  score->add_option("--embeddings", emb_path, "Embedding file");
  score->add_option("--trials", trials, "Trial list");
  score->add_option("--out", out, "Score file");
  score->add_flag("--sub-mean", sub_mean, "Center on the mean embedding");
  score->add_option("--pool", pool, "Embeddings for the mean (default: input)");

  // calibrate
  CalibrateJob cal;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Duration-aware logistic calibration");
  calibrate->add_option("--train-scores", cal.train_scores, "Training scores");
  calibrate->add_option("--train-trials", cal.train_trials,
                        "Labeled trials of the training scores");
  calibrate->add_option("--manifest", cal.manifest, "Durations");
  calibrate->add_option("--out-model", cal.model_out, "Model output");
  calibrate->add_option("--model", cal.model_in, "Existing model to apply");
  calibrate->add_option("--scores", cal.scores, "Scores to calibrate");
  calibrate->add_option("--out", cal.scores_out, "Calibrated scores");

  // fuse
  std::vector<std::string> inputs;
  CLI::App* fuse = app.add_subcommand("fuse", "Equal-weight score fusion");
  fuse->add_option("--scores", inputs, "Score files")->required();
  fuse->add_option("--out", out, "Fused score file");

  // evaluate
  double p_target = 0.05, c_miss = 1.0, c_fa = 1.0;
  CLI::App* evaluate = app.add_subcommand("evaluate", "EER and MinDCF");
  evaluate->add_option("--scores", emb_path, "Score file");
  evaluate->add_option("--trials", trials, "Labeled trial list");
  CLI::Option* p_opt = evaluate->add_option("--p-target", p_target, "Target prior");
  CLI::Option* cm_opt = evaluate->add_option("--c-miss", c_miss, "Miss cost");
  CLI::Option* cf_opt = evaluate->add_option("--c-fa", c_fa, "False-alarm cost");

  // adapt
  AdaptJob aj;
  int max_rounds = 3;
  std::vector<int> candidates;
  double epsilon = 0.0;
  CLI::App* adapt = app.add_subcommand("adapt", "Two-stage domain adaptation");
  adapt->add_flag("--synthetic-demo", aj.synthetic_demo,
                  "Built-in planted-partition scenario");
  adapt->add_flag("--skip-stage1", aj.skip_stage1, "Skip joint adaptation");
  CLI::Option* rounds_opt =
      adapt->add_option("--max-rounds", max_rounds, "Round cap");
  CLI::Option* cand_opt =
      adapt->add_option("--candidates", candidates, "AHC cluster counts");
  CLI::Option* eps_opt = adapt->add_option(
      "--epsilon", epsilon, "Minimum EER improvement (fraction)");
  adapt->add_option("--log", aj.log, "Run log TSV");
  adapt->add_option("--out-dir", aj.out_dir, "Final state directory");
  adapt->add_option("--manifest", aj.manifest, "Adaptation manifest");
  adapt->add_option("--feature-dir", aj.feature_dir, "Directory of <id>.fbk");
  adapt->add_option("--validation-trials", aj.validation_trials,
                    "Labeled validation trials");
  adapt->add_option("--checkpoint", aj.checkpoint, "Network checkpoint");
  CLI::Option* adapt_init_opt =
      adapt->add_option("--init-seed", init_seed, "Fresh network seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ExitCodeFor(ErrorKind::kConfig);
  }

  try {
    RunConfig config = (adapt->parsed() && aj.synthetic_demo)
                           ? SyntheticDemoDefaults()
                           : RunConfig{};
    if (!config_path.empty()) ApplyConfigFile(config_path, &config);
    Override(seed_opt, seed, &config.seed);
    Override(workers_opt, workers, &config.workers);
    Override(rounds_opt, max_rounds, &config.pipeline.max_rounds);
    Override(cand_opt, candidates, &config.pipeline.ahc_candidates);
    Override(eps_opt, epsilon, &config.pipeline.converge_epsilon);
    Override(p_opt, p_target, &config.pipeline.dcf.p_target);
    Override(cm_opt, c_miss, &config.pipeline.dcf.c_miss);
    Override(cf_opt, c_fa, &config.pipeline.dcf.c_fa);
    config.Finalize();
    const Paths& paths = config.paths;

    if (features->parsed()) {
      ExtractFeatures(config, Or(manifest, paths.manifest),
                      Or(out_dir, paths.features), std::cout);
    } else if (embeddings->parsed()) {
      emb.manifest = Or(emb.manifest, paths.manifest);
      emb.feature_dir = Or(emb.feature_dir, paths.features);
      emb.out = Or(emb.out, paths.embeddings);
      emb.checkpoint = Or(emb.checkpoint, init_opt->count() ? "" : paths.checkpoint);
      emb.variant = IfGiven(variant_opt, variant);
      emb.init_seed = IfGiven(init_opt, init_seed);
      ExtractEmbeddings(config, emb, std::cout);
    } else if (augment->parsed()) {
      MakeAugmentPlan(Or(manifest, paths.manifest), assets, config.seed, out,
                      expanded, std::cout);
    } else if (cluster->parsed()) {
      cj.embeddings = Or(cj.embeddings, paths.embeddings);
      cj.out_dir = Or(cj.out_dir, paths.output_dir);
      if (k_opt->count() == 0) cj.k = config.pipeline.kmeans_k;
      if (batch_opt->count() == 0) cj.batch_size = config.pipeline.kmeans_batch_size;
      if (iters_opt->count() == 0) cj.max_iters = config.pipeline.kmeans_max_iters;
      if (cluster_min_opt->count() == 0) cj.min_count = config.pipeline.min_count;
      cj.linkage = cluster_link_opt->count() ? ParseLinkage(linkage)
                                             : config.pipeline.linkage;
      cj.n_clusters = IfGiven(cluster_n_opt, n_clusters);
      cj.seed = config.seed;
      cj.workers = config.workers;
      Cluster(cj, std::cout);
    } else if (pseudo->parsed()) {
      if (pseudo_n_opt->count() == 0) {
        throw Error(ErrorKind::kConfig, "missing --n-clusters");
      }
      PseudoLabel(Or(kmeans_dir, paths.output_dir), n_clusters,
                  pseudo_min_opt->count() ? min_count : config.pipeline.min_count,
                  pseudo_link_opt->count() ? ParseLinkage(linkage)
                                           : config.pipeline.linkage,
                  out, std::cout);
    } else if (score->parsed()) {
      Score(Or(emb_path, paths.embeddings), Or(trials, paths.trials), sub_mean,
            pool, out, config.workers, std::cout);
    } else if (calibrate->parsed()) {
      cal.manifest = Or(cal.manifest, paths.manifest);
      Calibrate(config, cal, std::cout);
    } else if (fuse->parsed()) {
      FuseFiles(inputs, out, std::cout);
    } else if (evaluate->parsed()) {
      EvaluateFiles(emb_path, Or(trials, paths.trials), config.pipeline.dcf,
                    std::cout);
    } else if (adapt->parsed()) {
      aj.manifest = Or(aj.manifest, paths.manifest);
      aj.feature_dir = Or(aj.feature_dir, paths.features);
      aj.validation_trials = Or(aj.validation_trials, paths.validation_trials);
      aj.out_dir = Or(aj.out_dir, paths.output_dir);
      aj.init_seed = IfGiven(adapt_init_opt, init_seed);
      if (!aj.init_seed) aj.checkpoint = Or(aj.checkpoint, paths.checkpoint);
      Adapt(config, aj, std::cout, std::cerr);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << ErrorKindName(e.kind()) << ": " << e.what()
              << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return ExitCodeFor(ErrorKind::kIo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}

}  // namespace
}  // namespace sv::cli

int main(int argc, char** argv) { return sv::cli::Main(argc, argv); }
