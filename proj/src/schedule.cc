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

#include "sv/schedule.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "sv/error.h"

namespace sv {

std::string_view TrainPhaseName(TrainPhase phase) {
  switch (phase) {
    case TrainPhase::kInitial: return "initial";
    case TrainPhase::kLargeMarginFinetune: return "large_margin_finetune";
    case TrainPhase::kAdaptationFinetune: return "adaptation_finetune";
  }
  return "initial";
}

TrainPhase ParseTrainPhase(std::string_view name) {
  for (TrainPhase p : {TrainPhase::kInitial, TrainPhase::kLargeMarginFinetune,
                       TrainPhase::kAdaptationFinetune}) {
    if (TrainPhaseName(p) == name) return p;
  }
  throw Error(ErrorKind::kConfig, "unknown phase " + std::string(name));
}

std::string_view TrackName(Track track) {
  return track == Track::kTrack1 ? "track1" : "track3";
}

Track ParseTrack(std::string_view name) {
  if (name == "track1") return Track::kTrack1;
  if (name == "track3") return Track::kTrack3;
  throw Error(ErrorKind::kConfig, "unknown track " + std::string(name));
}

TrainPhaseConfig TrainPhaseConfig::Defaults(TrainPhase phase, Track track) {
  TrainPhaseConfig c;
  c.phase = phase;
  c.track = track;
  const bool t1 = track == Track::kTrack1;
  switch (phase) {
    case TrainPhase::kInitial:
      c.lr0 = 0.1;
      c.margin_start = 0.0;
      c.margin_end = t1 ? 0.25 : 0.15;
      c.crop_seconds = 2.0;
      break;
    case TrainPhase::kLargeMarginFinetune:
      c.lr0 = 1e-4;
      c.margin_start = c.margin_end = t1 ? 0.35 : 0.25;
      c.crop_seconds = 4.0;
      break;
    case TrainPhase::kAdaptationFinetune:
      // Continues from the previous phase at its final margin.
      c.lr0 = 1e-3;
      c.margin_start = c.margin_end = t1 ? 0.25 : 0.15;
      c.crop_seconds = 2.0;
      break;
  }
  return c;
}

void TrainPhaseConfig::Validate() const {
  if (!(lr0 > 0.0)) throw Error(ErrorKind::kConfig, "lr0 must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw Error(ErrorKind::kConfig, "lr_decay must lie in (0, 1]");
  }
  if (decay_interval_batches < 1 || batch_size < 1) {
    throw Error(ErrorKind::kConfig, "batch counts must be >= 1");
  }
  if (!(margin_start >= 0.0) || margin_end < margin_start) {
    throw Error(ErrorKind::kConfig, "need margin_end >= margin_start >= 0");
  }
  if (!(warmup_epochs > 0.0) || !(crop_seconds > 0.0) || !(scale > 0.0) ||
      weight_decay < 0.0) {
    throw Error(ErrorKind::kConfig, "invalid schedule constants");
  }
}

namespace {

double RoundSignificant(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return std::strtod(buf, nullptr);
}

}  // namespace

double LrAt(const TrainPhaseConfig& config, long batch_index) {
  if (batch_index < 0) throw Error(ErrorKind::kConfig, "negative batch index");
  if (config.phase != TrainPhase::kInitial) return config.lr0;
  const long steps = batch_index / config.decay_interval_batches;
  return RoundSignificant(config.lr0 *
                          std::pow(config.lr_decay, static_cast<double>(steps)));
}

double MarginAt(const TrainPhaseConfig& config, double epoch_progress) {
  if (!(epoch_progress >= 0.0)) {
    throw Error(ErrorKind::kConfig, "negative epoch progress");
  }
  const double ramp = std::min(1.0, epoch_progress / config.warmup_epochs);
  if (ramp >= 1.0) return config.margin_end;
  return config.margin_start + (config.margin_end - config.margin_start) * ramp;
}

int CropFrames(const TrainPhaseConfig& config, const FbankConfig& fbank) {
  const auto samples =
      static_cast<long>(std::llround(config.crop_seconds * fbank.sample_rate));
  return NumFrames(samples, fbank);
}

double EpochProgress(long batches, int batch_size, long corpus_size) {
  if (corpus_size < 1) throw Error(ErrorKind::kConfig, "empty corpus");
  return static_cast<double>(batches) * batch_size /
         static_cast<double>(corpus_size);
}

void SgdStep(std::span<double> params, std::span<const double> grads,
             double lr, double weight_decay) {
  if (params.size() != grads.size()) {
    throw Error(ErrorKind::kShape, "parameter and gradient sizes differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= lr * (grads[i] + weight_decay * params[i]);
  }
}

void SgdStep(RowMatrix& params, const RowMatrix& grads, double lr,
             double weight_decay) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols()) {
    throw Error(ErrorKind::kShape, "parameter and gradient shapes differ");
  }
  SgdStep(std::span<double>(params.data(), params.size()),
          std::span<const double>(grads.data(), grads.size()), lr,
          weight_decay);
}

}  // namespace sv
