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

#ifndef SV_TESTS_SCENARIOS_H_
#define SV_TESTS_SCENARIOS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sv/backend.h"
#include "sv/corpus_io.h"
#include "sv/pipeline.h"
#include "sv/random.h"

namespace sv::testing {

// Two score streams over the same trials. Each carries an additive bias
// that grows with the shorter trial duration, in opposite directions, and
// noise whose level depends on duration in opposite ways: system 0 is
// reliable on short trials, system 1 on long ones.
struct FusionScenario {
  DurationMap durations;
  std::vector<SystemScores> systems;
  std::vector<bool> calibration_labels;
  std::vector<bool> evaluation_labels;
};

inline double ScenarioScore(int system, bool target, double q, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double bias = system == 0 ? 0.25 * (q - 8.0) : -0.2 * (q - 8.0);
  const double sigma = system == 0 ? 0.4 + 0.1 * q : 2.4 - 0.1 * q;
  return (target ? 2.0 : 0.0) + bias + sigma * g(rng);
}

inline FusionScenario MakeFusionScenario(std::uint64_t seed, int n_utts = 400,
                                         int n_calibration = 8000,
                                         int n_evaluation = 20000) {
  Rng rng(seed);
  FusionScenario s;
  std::uniform_real_distribution<double> duration(1.0, 20.0);
  std::vector<std::string> ids;
  for (int i = 0; i < n_utts; ++i) {
    ids.push_back("utt" + std::to_string(i));
    s.durations[ids.back()] = duration(rng);
  }
  std::uniform_int_distribution<int> pick(0, n_utts - 1);
  std::bernoulli_distribution is_target(0.3);
  s.systems.resize(2);
  auto make = [&](int n, std::vector<bool>* labels, bool calibration) {
    for (int k = 0; k < n; ++k) {
      const int a = pick(rng);
      int b = pick(rng);
      while (b == a) b = pick(rng);
      const bool target = is_target(rng);
      labels->push_back(target);
      const double q = std::min(s.durations[ids[a]], s.durations[ids[b]]);
      for (int sys = 0; sys < 2; ++sys) {
        ScoreSet& out = calibration ? s.systems[sys].calibration
                                    : s.systems[sys].evaluation;
        out.entries.push_back({ids[a], ids[b], ScenarioScore(sys, target, q, rng)});
      }
    }
  };
  make(n_calibration, &s.calibration_labels, true);
  make(n_evaluation, &s.evaluation_labels, false);
  return s;
}

// Copy with enroll and test exchanged in every trial.
inline ScoreSet Swapped(const ScoreSet& scores) {
  ScoreSet out = scores;
  for (auto& e : out.entries) std::swap(e.enroll, e.test);
  return out;
}

}  // namespace sv::testing

#endif  // SV_TESTS_SCENARIOS_H_
