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

#include "sv/augment.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <string>
#include <unordered_map>

#include "binary_io.h"
#include "fft.h"
#include "sv/error.h"
#include "text_util.h"

namespace sv {

std::string_view AugKindName(AugKind kind) {
  switch (kind) {
    case AugKind::kOrig: return "orig";
    case AugKind::kNoise: return "noise";
    case AugKind::kMusic: return "music";
    case AugKind::kBabble: return "babble";
    case AugKind::kReverb: return "reverb";
    case AugKind::kTempo09: return "tempo_0.9";
    case AugKind::kTempo11: return "tempo_1.1";
    case AugKind::kSpeed09: return "speed_0.9";
    case AugKind::kSpeed11: return "speed_1.1";
  }
  return "orig";
}

AugKind ParseAugKind(std::string_view name) {
  for (AugKind k : kAllAugKinds) {
    if (AugKindName(k) == name) return k;
  }
  throw Error(ErrorKind::kParse,
              "unknown augmentation kind: " + std::string(name));
}

double AugFactor(AugKind kind) {
  switch (kind) {
    case AugKind::kTempo09:
    case AugKind::kSpeed09:
      return 0.9;
    case AugKind::kTempo11:
    case AugKind::kSpeed11:
      return 1.1;
    default:
      return 1.0;
  }
}

bool IsSpeedKind(AugKind kind) {
  return kind == AugKind::kSpeed09 || kind == AugKind::kSpeed11;
}

bool IsApproximated(AugKind kind) {
  return kind == AugKind::kTempo09 || kind == AugKind::kTempo11;
}

namespace {

const std::vector<std::string>* AssetsFor(const AugmentAssets& assets,
                                          AugKind kind) {
  switch (kind) {
    case AugKind::kNoise: return &assets.noise;
    case AugKind::kMusic: return &assets.music;
    case AugKind::kBabble: return &assets.babble;
    case AugKind::kReverb: return &assets.rir;
    default: return nullptr;
  }
}

const SnrRange* SnrFor(const PlanOptions& options, AugKind kind) {
  switch (kind) {
    case AugKind::kNoise: return &options.noise_snr;
    case AugKind::kMusic: return &options.music_snr;
    case AugKind::kBabble: return &options.babble_snr;
    default: return nullptr;
  }
}

double Power(const std::vector<float>& x) {
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

float Clip(double v) {
  return static_cast<float>(std::clamp(v, -1.0, 1.0));
}

}  // namespace

AugmentationPlan BuildPlan(const Manifest& manifest, const AugmentAssets& assets,
                           std::uint64_t seed, const PlanOptions& options) {
  AugmentationPlan plan;
  plan.entries.reserve(manifest.records.size() * kAllAugKinds.size());
  for (const auto& r : manifest.records) {
    for (AugKind kind : kAllAugKinds) {
      PlanEntry e;
      e.utt_id = r.id;
      e.kind = kind;
      const auto* pool = AssetsFor(assets, kind);
      const auto* snr = SnrFor(options, kind);
      if ((pool && !pool->empty()) || snr) {
        Rng rng(DeriveSeed(seed, r.id, AugKindName(kind)));
        if (pool && !pool->empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, pool->size() - 1);
          e.asset = (*pool)[pick(rng)];
        }
        if (snr) {
          std::uniform_real_distribution<double> draw(snr->low, snr->high);
          e.snr_db = draw(rng);
        }
      }
      plan.entries.push_back(std::move(e));
    }
  }
  return plan;
}

void WritePlan(const AugmentationPlan& plan, const std::string& path) {
  auto os = internal::OpenForWrite(path);
  os << "utt_id\tkind\tasset\tsnr_db\n";
  for (const auto& e : plan.entries) {
    os << e.utt_id << '\t' << AugKindName(e.kind) << '\t'
       << e.asset.value_or("") << '\t'
       << (e.snr_db ? internal::FormatDouble(*e.snr_db) : "") << '\n';
  }
  internal::FinishWrite(os, path);
}

AugmentationPlan ReadPlan(const std::string& path) {
  auto is = internal::OpenForRead(path);
  AugmentationPlan plan;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view text = internal::StripCr(line);
    if (lineno == 1) {
      if (text != "utt_id\tkind\tasset\tsnr_db") {
        throw Error(ErrorKind::kParse, path + ": bad plan header");
      }
      continue;
    }
    if (text.empty()) continue;
    const auto f = internal::SplitTabs(text);
    if (f.size() != 4 || f[0].empty()) {
      throw Error(ErrorKind::kParse,
                  path + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    PlanEntry e;
    e.utt_id = std::string(f[0]);
    e.kind = ParseAugKind(f[1]);
    if (!f[2].empty()) e.asset = std::string(f[2]);
    if (!f[3].empty()) {
      e.snr_db = internal::ParseDouble(f[3]);
      if (!e.snr_db) {
        throw Error(ErrorKind::kParse,
                    path + ":" + std::to_string(lineno) + ": bad snr_db");
      }
    }
    plan.entries.push_back(std::move(e));
  }
  return plan;
}

std::string ExpandedId(const std::string& utt_id, AugKind kind) {
  if (kind == AugKind::kOrig) return utt_id;
  return utt_id + "-" + std::string(AugKindName(kind));
}

std::string ExpandedSpeaker(const std::string& speaker, AugKind kind) {
  switch (kind) {
    case AugKind::kSpeed09: return speaker + "#sp0.9";
    case AugKind::kSpeed11: return speaker + "#sp1.1";
    default: return speaker;
  }
}

void ForEachExpandedRecord(
    const Manifest& manifest, const AugmentationPlan& plan,
    const std::function<void(const UtteranceRecord&, AugKind)>& visit) {
  std::unordered_map<std::string_view, std::uint16_t> kinds;
  kinds.reserve(manifest.records.size());
  for (const auto& e : plan.entries) {
    kinds[e.utt_id] |= static_cast<std::uint16_t>(1u << static_cast<int>(e.kind));
  }
  constexpr std::uint16_t kFull = (1u << kAllAugKinds.size()) - 1;
  UtteranceRecord out;
  for (const auto& r : manifest.records) {
    auto it = kinds.find(r.id);
    const std::uint16_t mask = it == kinds.end() ? 0 : it->second;
    if (mask != kFull) {
      throw Error(ErrorKind::kIncompletePlan,
                  r.id + " has " + std::to_string(std::popcount(mask)) +
                      " of 9 augmentation kinds");
    }
    for (AugKind kind : kAllAugKinds) {
      out.id = ExpandedId(r.id, kind);
      out.speaker = r.speaker;
      if (out.speaker) out.speaker = ExpandedSpeaker(*r.speaker, kind);
      out.path = r.path;
      out.duration = r.duration / AugFactor(kind);
      out.domain = r.domain;
      out.labeled = r.labeled;
      visit(out, kind);
    }
  }
}

Manifest ExpandManifest(const Manifest& manifest, const AugmentationPlan& plan) {
  Manifest out;
  out.records.reserve(manifest.records.size() * kAllAugKinds.size());
  ForEachExpandedRecord(manifest, plan,
                        [&](const UtteranceRecord& r, AugKind) {
                          out.records.push_back(r);
                        });
  return out;
}

double NoiseScale(double signal_power, double noise_power, double snr_db) {
  return std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
}

Waveform MixNoise(const Waveform& signal, const Waveform& noise, double snr_db,
                  Rng& rng) {
  if (!std::isfinite(snr_db)) {
    throw Error(ErrorKind::kConfig, "snr_db must be finite");
  }
  if (signal.sample_rate != noise.sample_rate) {
    throw Error(ErrorKind::kUnsupportedFormat, "sample rate mismatch");
  }
  if (noise.samples.empty() || Power(noise.samples) == 0.0) {
    throw Error(ErrorKind::kDegenerateNoise, "noise has zero power");
  }
  const std::size_t n = signal.samples.size();
  const std::size_t m = noise.samples.size();
  std::uniform_int_distribution<std::size_t> start_dist(0, m - 1);
  const std::size_t start = start_dist(rng);
  std::vector<float> looped(n);
  for (std::size_t i = 0; i < n; ++i) looped[i] = noise.samples[(start + i) % m];
  const double noise_power = Power(looped);
  if (noise_power == 0.0) {
    throw Error(ErrorKind::kDegenerateNoise, "noise segment has zero power");
  }
  const double scale = NoiseScale(Power(signal.samples), noise_power, snr_db);
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = Clip(signal.samples[i] + scale * looped[i]);
  }
  return out;
}

Waveform Reverb(const Waveform& signal, const Waveform& rir) {
  if (signal.sample_rate != rir.sample_rate) {
    throw Error(ErrorKind::kUnsupportedFormat, "sample rate mismatch");
  }
  if (std::all_of(rir.samples.begin(), rir.samples.end(),
                  [](float v) { return v == 0.0f; })) {
    throw Error(ErrorKind::kDegenerateRir, "impulse response is all zeros");
  }
  const std::size_t n = signal.samples.size();
  const std::size_t m = rir.samples.size();
  const std::size_t size = std::bit_ceil(n + m - 1);
  internal::RealFft fft(static_cast<int>(size));
  std::vector<double> buf(size, 0.0);
  std::copy(signal.samples.begin(), signal.samples.end(), buf.begin());
  std::vector<std::complex<double>> a = fft.Forward(buf.data());
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(rir.samples.begin(), rir.samples.end(), buf.begin());
  const auto& b = fft.Forward(buf.data());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k];
  const auto& conv = fft.Inverse(a.data());

  double in_peak = 0.0, out_peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    in_peak = std::max(in_peak, std::abs(static_cast<double>(signal.samples[i])));
    out_peak = std::max(out_peak, std::abs(conv[i]));
  }
  const double gain = out_peak > 0.0 ? in_peak / out_peak : 0.0;
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = Clip(conv[i] * gain);
  return out;
}

Waveform Speed(const Waveform& signal, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::kInvalidFactor,
                "speed factor must be > 0, got " + std::to_string(factor));
  }
  const std::size_t n = signal.samples.size();
  if (n == 0) throw Error(ErrorKind::kTooShort, "empty waveform");
  const auto out_len = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(n) / factor)));
  const auto& x = signal.samples;
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * factor;
    auto idx = static_cast<std::size_t>(pos);
    double v;
    if (n == 1) {
      v = x[0];
    } else {
      // Past the last sample the final segment is extended linearly.
      idx = std::min(idx, n - 2);
      const double frac = pos - static_cast<double>(idx);
      v = x[idx] + frac * (static_cast<double>(x[idx + 1]) - x[idx]);
    }
    out.samples[i] = Clip(v);
  }
  return out;
}

Waveform ApplyAugmentation(const Waveform& signal, const PlanEntry& entry,
                           const Waveform* asset, Rng& rng) {
  auto need_asset = [&]() -> const Waveform& {
    if (!asset) {
      throw Error(ErrorKind::kConfig, "augmentation " +
                                          std::string(AugKindName(entry.kind)) +
                                          " for " + entry.utt_id +
                                          " needs an asset");
    }
    return *asset;
  };
  switch (entry.kind) {
    case AugKind::kOrig:
      return signal;
    case AugKind::kNoise:
    case AugKind::kMusic:
    case AugKind::kBabble: {
      if (!entry.snr_db) {
        throw Error(ErrorKind::kConfig, "missing snr_db for " + entry.utt_id);
      }
      return MixNoise(signal, need_asset(), *entry.snr_db, rng);
    }
    case AugKind::kReverb:
      return Reverb(signal, need_asset());
    case AugKind::kTempo09:
    case AugKind::kTempo11:
    case AugKind::kSpeed09:
    case AugKind::kSpeed11:
      return Speed(signal, AugFactor(entry.kind));
  }
  return signal;
}

}  // namespace sv
