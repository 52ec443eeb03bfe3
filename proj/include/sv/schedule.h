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

#ifndef SV_SCHEDULE_H_
#define SV_SCHEDULE_H_

#include <span>
#include <string_view>

#include "sv/dsp.h"
#include "sv/matrix.h"

namespace sv {

enum class TrainPhase { kInitial, kLargeMarginFinetune, kAdaptationFinetune };
enum class Track { kTrack1, kTrack3 };

std::string_view TrainPhaseName(TrainPhase phase);
TrainPhase ParseTrainPhase(std::string_view name);
std::string_view TrackName(Track track);
Track ParseTrack(std::string_view name);

struct TrainPhaseConfig {
  TrainPhase phase = TrainPhase::kInitial;
  Track track = Track::kTrack1;
  double lr0 = 0.1;
  double lr_decay = 0.9;
  long decay_interval_batches = 50000;
  int batch_size = 128;
  double weight_decay = 2e-5;
  double margin_start = 0.0;
  double margin_end = 0.25;
  double warmup_epochs = 2.0;
  double crop_seconds = 2.0;
  double scale = 32.0;

  // Published hyperparameters for a phase and track.
  static TrainPhaseConfig Defaults(TrainPhase phase, Track track);

  // Throws ConfigError.
  void Validate() const;
};

struct ScheduleState {
  long batch_index = 0;
  double epoch_progress = 0.0;
};

// Initial phase: lr0 * lr_decay^floor(batch / decay_interval); the
// fine-tuning phases keep lr0 constant. Values are rounded to 15 significant
// decimal digits so decimal hyperparameters compare exactly.
double LrAt(const TrainPhaseConfig& config, long batch_index);

// margin_start + (margin_end - margin_start) * min(1, epochs / warmup).
double MarginAt(const TrainPhaseConfig& config, double epoch_progress);

// Frames in a crop of crop_seconds under the frame geometry of `fbank`.
int CropFrames(const TrainPhaseConfig& config, const FbankConfig& fbank = {});

// Fractional epochs after `batches` batches over a corpus.
double EpochProgress(long batches, int batch_size, long corpus_size);

// p <- p - lr * (g + weight_decay * p). Throws ShapeError.
void SgdStep(std::span<double> params, std::span<const double> grads,
             double lr, double weight_decay);
void SgdStep(RowMatrix& params, const RowMatrix& grads, double lr,
             double weight_decay);

}  // namespace sv

#endif  // SV_SCHEDULE_H_
