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

#ifndef SV_AUGMENT_H_
#define SV_AUGMENT_H_

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sv/corpus_io.h"
#include "sv/random.h"

namespace sv {

enum class AugKind {
  kOrig,
  kNoise,
  kMusic,
  kBabble,
  kReverb,
  kTempo09,
  kTempo11,
  kSpeed09,
  kSpeed11,
};

inline constexpr std::array<AugKind, 9> kAllAugKinds = {
    AugKind::kOrig,    AugKind::kNoise,   AugKind::kMusic,
    AugKind::kBabble,  AugKind::kReverb,  AugKind::kTempo09,
    AugKind::kTempo11, AugKind::kSpeed09, AugKind::kSpeed11};

std::string_view AugKindName(AugKind kind);
// Throws ParseError for unknown names.
AugKind ParseAugKind(std::string_view name);

// Speed/tempo factor of a kind, 1.0 for the others.
double AugFactor(AugKind kind);
// Copies whose speaker identity is treated as a new speaker.
bool IsSpeedKind(AugKind kind);
// Tempo copies are rendered with pitch-changing speed perturbation, which
// only approximates a pitch-preserving tempo change.
bool IsApproximated(AugKind kind);

struct PlanEntry {
  std::string utt_id;
  AugKind kind = AugKind::kOrig;
  std::optional<std::string> asset;
  std::optional<double> snr_db;

  bool operator==(const PlanEntry&) const = default;
};

struct AugmentationPlan {
  std::vector<PlanEntry> entries;

  bool operator==(const AugmentationPlan&) const = default;
};

struct AugmentAssets {
  std::vector<std::string> noise;
  std::vector<std::string> music;
  std::vector<std::string> babble;
  std::vector<std::string> rir;
};

struct SnrRange {
  double low;
  double high;
};

struct PlanOptions {
  SnrRange noise_snr{0.0, 15.0};
  SnrRange music_snr{5.0, 15.0};
  SnrRange babble_snr{13.0, 20.0};
};

// Nine entries per utterance, one per kind. Assets and SNRs are drawn from
// a per-utterance stream seeded by hash(seed, utt_id, kind); kinds whose
// asset list is empty get no asset.
AugmentationPlan BuildPlan(const Manifest& manifest, const AugmentAssets& assets,
                           std::uint64_t seed, const PlanOptions& options = {});

// TSV with header `utt_id kind asset snr_db`; empty fields are absent.
void WritePlan(const AugmentationPlan& plan, const std::string& path);
AugmentationPlan ReadPlan(const std::string& path);

// Id of the augmented copy: the source id for kOrig, `<id>-<kind>` otherwise.
std::string ExpandedId(const std::string& utt_id, AugKind kind);
// `<spk>#sp0.9` / `<spk>#sp1.1` for speed copies, unchanged otherwise.
std::string ExpandedSpeaker(const std::string& speaker, AugKind kind);

// Streams the expanded records (9 per source utterance, in source order and
// kind order). Throws IncompletePlan when an utterance lacks a kind.
void ForEachExpandedRecord(
    const Manifest& manifest, const AugmentationPlan& plan,
    const std::function<void(const UtteranceRecord&, AugKind)>& visit);

Manifest ExpandManifest(const Manifest& manifest, const AugmentationPlan& plan);

// Noise is looped from a random start to the signal length and scaled so
// that 10 log10(P_signal / P_noise) equals snr_db, then added; the result is
// clipped to [-1, 1]. Throws DegenerateNoise for zero-power noise.
Waveform MixNoise(const Waveform& signal, const Waveform& noise, double snr_db,
                  Rng& rng);

// Scale applied to the noise in MixNoise.
double NoiseScale(double signal_power, double noise_power, double snr_db);

// Linear convolution with the impulse response, truncated to the input
// length and rescaled to the input peak. Throws DegenerateRir.
Waveform Reverb(const Waveform& signal, const Waveform& rir);

// Time-axis resampling by linear interpolation to round(N / factor)
// samples; pitch changes with speed. Throws InvalidFactor for factor <= 0.
Waveform Speed(const Waveform& signal, double factor);

// Renders one plan entry. `asset` must be provided for noise, music,
// babble and reverb kinds.
Waveform ApplyAugmentation(const Waveform& signal, const PlanEntry& entry,
                           const Waveform* asset, Rng& rng);

}  // namespace sv

#endif  // SV_AUGMENT_H_
