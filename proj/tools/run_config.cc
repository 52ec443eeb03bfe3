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

#include "run_config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <string_view>

#include "CLI11.hpp"
#include "sv/error.h"

namespace sv::cli {

namespace {

using Values = std::vector<std::string>;
using Setter = std::function<void(const Values&)>;

Error BadValue(const std::string& key, const std::string& why) {
  return Error(ErrorKind::kConfig, "config key " + key + ": " + why);
}

const std::string& Single(const std::string& key, const Values& v) {
  if (v.size() != 1) throw BadValue(key, "expected a single value");
  return v.front();
}

template <typename T>
T Number(const std::string& key, const std::string& s) {
  T out{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue(key, "cannot parse '" + s + "'");
  }
  return out;
}

template <typename T>
Setter Num(const std::string& key, T* field) {
  return [key, field](const Values& v) {
    *field = Number<T>(key, Single(key, v));
  };
}

Setter Bool(const std::string& key, bool* field) {
  return [key, field](const Values& v) {
    const std::string& s = Single(key, v);
    if (s == "true" || s == "1") {
      *field = true;
    } else if (s == "false" || s == "0") {
      *field = false;
    } else {
      throw BadValue(key, "expected true or false");
    }
  };
}

Setter Str(const std::string& key, std::string* field) {
  return [key, field](const Values& v) { *field = Single(key, v); };
}

template <typename Parse, typename T>
Setter Enum(const std::string& key, T* field, Parse parse) {
  return [key, field, parse](const Values& v) {
    try {
      *field = parse(Single(key, v));
    } catch (const Error& e) {
      throw BadValue(key, e.what());
    }
  };
}

WindowType ParseWindow(std::string_view name) {
  if (name == "hamming") return WindowType::kHamming;
  if (name == "hanning") return WindowType::kHanning;
  if (name == "rectangular") return WindowType::kRectangular;
  throw Error(ErrorKind::kConfig, "unknown window " + std::string(name));
}

void AddPhase(std::map<std::string, Setter>& table, const std::string& section,
              TrainPhaseConfig* c) {
  auto k = [&](const char* name) { return section + "." + name; };
  table[k("phase")] = Enum(k("phase"), &c->phase, ParseTrainPhase);
  table[k("track")] = Enum(k("track"), &c->track, ParseTrack);
  table[k("lr0")] = Num(k("lr0"), &c->lr0);
  table[k("lr_decay")] = Num(k("lr_decay"), &c->lr_decay);
  table[k("decay_interval_batches")] =
      Num(k("decay_interval_batches"), &c->decay_interval_batches);
  table[k("batch_size")] = Num(k("batch_size"), &c->batch_size);
  table[k("weight_decay")] = Num(k("weight_decay"), &c->weight_decay);
  table[k("margin_start")] = Num(k("margin_start"), &c->margin_start);
  table[k("margin_end")] = Num(k("margin_end"), &c->margin_end);
  table[k("warmup_epochs")] = Num(k("warmup_epochs"), &c->warmup_epochs);
  table[k("crop_seconds")] = Num(k("crop_seconds"), &c->crop_seconds);
  table[k("scale")] = Num(k("scale"), &c->scale);
}

std::map<std::string, Setter> Table(RunConfig* c) {
  std::map<std::string, Setter> t;
  t["seed"] = Num("seed", &c->seed);
  t["workers"] = Num("workers", &c->workers);

  Paths* p = &c->paths;
  t["paths.manifest"] = Str("paths.manifest", &p->manifest);
  t["paths.features"] = Str("paths.features", &p->features);
  t["paths.embeddings"] = Str("paths.embeddings", &p->embeddings);
  t["paths.trials"] = Str("paths.trials", &p->trials);
  t["paths.validation_trials"] =
      Str("paths.validation_trials", &p->validation_trials);
  t["paths.checkpoint"] = Str("paths.checkpoint", &p->checkpoint);
  t["paths.output_dir"] = Str("paths.output_dir", &p->output_dir);

  FbankConfig* f = &c->fbank;
  t["fbank.sample_rate"] = Num("fbank.sample_rate", &f->sample_rate);
  t["fbank.n_mels"] = Num("fbank.n_mels", &f->n_mels);
  t["fbank.frame_length"] = Num("fbank.frame_length", &f->frame_length);
  t["fbank.frame_shift"] = Num("fbank.frame_shift", &f->frame_shift);
  t["fbank.fft_size"] = Num("fbank.fft_size", &f->fft_size);
  t["fbank.window"] = Enum("fbank.window", &f->window, ParseWindow);
  t["fbank.dither"] = Num("fbank.dither", &f->dither);
  t["fbank.floor"] = Num("fbank.floor", &f->floor);
  t["fbank.low_freq"] = Num("fbank.low_freq", &f->low_freq);
  t["fbank.high_freq"] = Num("fbank.high_freq", &f->high_freq);

  ResUnetConfig* r = &c->resunet;
  t["resunet.residual_blocks"] =
      Num("resunet.residual_blocks", &r->residual_blocks);
  t["resunet.base_channels"] = Num("resunet.base_channels", &r->base_channels);
  t["resunet.embed_dim"] = Num("resunet.embed_dim", &r->embed_dim);
  t["resunet.n_mels"] = Num("resunet.n_mels", &r->n_mels);
  t["resunet.se_reduction"] = Num("resunet.se_reduction", &r->se_reduction);

  AddPhase(t, "stage1", &c->pipeline.stage1);
  AddPhase(t, "adaptation", &c->pipeline.adaptation);

  PipelineConfig* q = &c->pipeline;
  t["pipeline.kmeans_k"] = Num("pipeline.kmeans_k", &q->kmeans_k);
  t["pipeline.ahc_candidates"] = [q](const Values& v) {
    if (v.empty()) throw BadValue("pipeline.ahc_candidates", "empty list");
    q->ahc_candidates.clear();
    for (const auto& s : v) {
      q->ahc_candidates.push_back(Number<int>("pipeline.ahc_candidates", s));
    }
  };
  t["pipeline.min_count"] = Num("pipeline.min_count", &q->min_count);
  t["pipeline.max_rounds"] = Num("pipeline.max_rounds", &q->max_rounds);
  t["pipeline.converge_epsilon"] =
      Num("pipeline.converge_epsilon", &q->converge_epsilon);
  t["pipeline.reselect_each_round"] =
      Bool("pipeline.reselect_each_round", &q->reselect_each_round);
  t["pipeline.kmeans_batch_size"] =
      Num("pipeline.kmeans_batch_size", &q->kmeans_batch_size);
  t["pipeline.kmeans_max_iters"] =
      Num("pipeline.kmeans_max_iters", &q->kmeans_max_iters);
  t["pipeline.linkage"] = Enum("pipeline.linkage", &q->linkage, ParseLinkage);
  t["pipeline.num_subcenters"] =
      Num("pipeline.num_subcenters", &q->num_subcenters);
  t["pipeline.stage1_steps"] = Num("pipeline.stage1_steps", &q->stage1_steps);
  t["pipeline.adapt_steps"] = Num("pipeline.adapt_steps", &q->adapt_steps);
  t["pipeline.triplet_margin"] =
      Num("pipeline.triplet_margin", &q->triplet_margin);
  t["pipeline.triplet_views"] = Num("pipeline.triplet_views", &q->triplet_views);

  t["dcf.p_target"] = Num("dcf.p_target", &q->dcf.p_target);
  t["dcf.c_miss"] = Num("dcf.c_miss", &q->dcf.c_miss);
  t["dcf.c_fa"] = Num("dcf.c_fa", &q->dcf.c_fa);

  CalibrationOptions* o = &c->calibration;
  t["calibration.max_iters"] = Num("calibration.max_iters", &o->max_iters);
  t["calibration.l2"] = Num("calibration.l2", &o->l2);
  t["calibration.learning_rate"] =
      Num("calibration.learning_rate", &o->learning_rate);

  SyntheticOptions* s = &c->synthetic;
  t["synthetic.dim"] = Num("synthetic.dim", &s->dim);
  t["synthetic.source_speakers"] =
      Num("synthetic.source_speakers", &s->source_speakers);
  t["synthetic.source_utts"] = Num("synthetic.source_utts", &s->source_utts);
  t["synthetic.target_speakers"] =
      Num("synthetic.target_speakers", &s->target_speakers);
  t["synthetic.target_utts"] = Num("synthetic.target_utts", &s->target_utts);
  t["synthetic.labeled_target_speakers"] =
      Num("synthetic.labeled_target_speakers", &s->labeled_target_speakers);
  t["synthetic.labeled_target_utts"] =
      Num("synthetic.labeled_target_utts", &s->labeled_target_utts);
  t["synthetic.validation_speakers"] =
      Num("synthetic.validation_speakers", &s->validation_speakers);
  t["synthetic.validation_utts"] =
      Num("synthetic.validation_utts", &s->validation_utts);
  t["synthetic.intra_sigma_deg"] =
      Num("synthetic.intra_sigma_deg", &s->intra_sigma_deg);
  t["synthetic.min_inter_deg"] = Num("synthetic.min_inter_deg", &s->min_inter_deg);
  t["synthetic.view_sigma_deg"] =
      Num("synthetic.view_sigma_deg", &s->view_sigma_deg);
  t["synthetic.shift_angle_deg"] =
      Num("synthetic.shift_angle_deg", &s->shift_angle_deg);
  t["synthetic.nuisance_scale"] =
      Num("synthetic.nuisance_scale", &s->nuisance_scale);
  t["synthetic.nuisance_rank"] =
      Num("synthetic.nuisance_rank", &s->nuisance_rank);
  t["synthetic.offset_scale"] = Num("synthetic.offset_scale", &s->offset_scale);
  t["synthetic.shrink"] = Num("synthetic.shrink", &s->shrink);
  return t;
}

}  // namespace

void RunConfig::Finalize() {
  if (workers < 1) throw Error(ErrorKind::kConfig, "workers must be >= 1");
  pipeline.seed = seed;
  pipeline.workers = workers;
  synthetic.seed = seed;
  fbank.Validate();
  resunet.Validate();
  pipeline.Validate();
  if (calibration.max_iters < 0 || !(calibration.l2 >= 0.0) ||
      !(calibration.learning_rate > 0.0)) {
    throw Error(ErrorKind::kConfig, "invalid calibration options");
  }
}

RunConfig SyntheticDemoDefaults() {
  RunConfig c;
  PipelineConfig& p = c.pipeline;
  const int g = c.synthetic.target_speakers;
  p.kmeans_k = 200;
  p.ahc_candidates = {g / 2, g, 2 * g};
  p.min_count = 10;
  p.max_rounds = 3;
  p.kmeans_batch_size = 512;
  p.stage1_steps = 100;
  p.adapt_steps = 50;
  p.stage1.lr0 = 1e-3;
  // The demo embedder starts trained, so stage 1 runs at the final margin.
  p.stage1.margin_start = p.stage1.margin_end;
  p.stage1.batch_size = 64;
  p.adaptation.batch_size = 64;
  return c;
}

void ApplyConfigFile(const std::string& path, RunConfig* config) {
  {
    std::ifstream probe(path);
    if (!probe) throw Error(ErrorKind::kIo, "cannot open config file " + path);
  }
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw Error(ErrorKind::kConfig, path + ": " + e.what());
  }
  // The track reset must precede per-field keys wherever it appears.
  for (const auto& item : items) {
    if (item.parents.empty() && item.name == "track") {
      const Track track = ParseTrack(Single("track", item.inputs));
      config->pipeline.stage1 =
          TrainPhaseConfig::Defaults(TrainPhase::kInitial, track);
      config->pipeline.adaptation =
          TrainPhaseConfig::Defaults(TrainPhase::kAdaptationFinetune, track);
    }
  }
  const auto table = Table(config);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.empty() && item.name == "track") continue;
    const std::string key = item.fullname();
    auto it = table.find(key);
    if (it == table.end()) {
      throw Error(ErrorKind::kConfig, path + ": unknown key " + key);
    }
    it->second(item.inputs);
  }
}

}  // namespace sv::cli
