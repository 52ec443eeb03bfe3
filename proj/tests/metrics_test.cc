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
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "sv/metrics.h"

namespace sv {
namespace {

using testing::ThrownKind;

TEST_CASE("hand-computed operating points") {
  const std::vector<double> s = {0.9, 0.8, 0.3, 0.5, 0.2, 0.1};
  const std::vector<bool> l = {true, true, true, false, false, false};
  CHECK(Eer(s, l) == doctest::Approx(1.0 / 3.0));
  CHECK(MinDcf(s, l) == doctest::Approx(1.0 / 3.0));
  const Metrics m = Evaluate(s, l);
  CHECK(m.threshold == 0.5);

  const std::vector<double> sep = {3.0, 2.0, 1.0, 0.0};
  const std::vector<bool> sl = {true, true, false, false};
  CHECK(Eer(sep, sl) == 0.0);
  CHECK(MinDcf(sep, sl) == 0.0);
}

TEST_CASE("curve endpoints and the bracketing EER point") {
  const std::vector<double> s = {1.0, 2.0, 3.0, 4.0};
  const std::vector<bool> l = {false, false, true, true};
  const DetCurve c = ComputeDetCurve(s, l);
  REQUIRE(c.thresholds.size() == 6);
  CHECK(c.thresholds.front() == -std::numeric_limits<double>::infinity());
  CHECK(c.thresholds.back() == std::numeric_limits<double>::infinity());
  CHECK(Eer(s, l) == 0.0);
  const std::vector<double> s2 = {1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<bool> l2 = {false, true, false, true, false};
  // (miss, fa) moves from (1/2, 2/3) to (1/2, 1/3) across threshold 4.
  CHECK(Eer(s2, l2) == doctest::Approx(0.5));
  CHECK(Eer(s2, l2) == testing::BruteForceSweep(s2, l2).eer);
}

TEST_CASE("metrics agree exactly with a brute-force threshold sweep") {
  Rng rng(12);
  for (int n = 0; n < 200; ++n) {
    const auto set = testing::RandomTrialSet(rng, 2000);
    const auto oracle = testing::BruteForceSweep(set.scores, set.labels);
    const Metrics m = Evaluate(set.scores, set.labels);
    CHECK(m.eer == oracle.eer);
    CHECK(m.min_dcf == oracle.min_dcf);
  }
}

TEST_CASE("metrics depend only on the score order") {
  Rng rng(13);
  for (int n = 0; n < 100; ++n) {
    const auto set = testing::RandomTrialSet(rng, 1000);
    const Metrics base = Evaluate(set.scores, set.labels);
    for (const auto& f : testing::MonotoneTransforms()) {
      std::vector<double> mapped;
      for (double s : set.scores) mapped.push_back(f(s));
      const Metrics m = Evaluate(mapped, set.labels);
      CHECK(m.eer == base.eer);
      CHECK(m.min_dcf == base.min_dcf);
    }
    std::vector<std::size_t> perm(set.scores.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> ps;
    std::vector<bool> pl;
    for (std::size_t i : perm) {
      ps.push_back(set.scores[i]);
      pl.push_back(set.labels[i]);
    }
    CHECK(Eer(ps, pl) == base.eer);
  }
}

TEST_CASE("rates are monotone along the curve") {
  Rng rng(14);
  const auto set = testing::RandomTrialSet(rng, 500);
  const DetCurve c = ComputeDetCurve(set.scores, set.labels);
  CHECK(c.miss_rates.front() == 0.0);
  CHECK(c.fa_rates.front() == 1.0);
  CHECK(c.miss_rates.back() == 1.0);
  CHECK(c.fa_rates.back() == 0.0);
  for (std::size_t i = 1; i < c.thresholds.size(); ++i) {
    CHECK(c.thresholds[i] > c.thresholds[i - 1]);
    CHECK(c.miss_rates[i] >= c.miss_rates[i - 1]);
    CHECK(c.fa_rates[i] <= c.fa_rates[i - 1]);
  }
}

TEST_CASE("detection cost normalization") {
  DcfParams p;
  CHECK(NormalizedDcf(1.0, 0.0, p) == doctest::Approx(1.0));
  CHECK(NormalizedDcf(0.0, 1.0, p) == doctest::Approx(19.0));
  DcfParams q{0.01, 1.0, 1.0};
  CHECK(NormalizedDcf(0.5, 0.01, q) == doctest::Approx(0.5 + 0.99));
  DcfParams bad{1.5, 1.0, 1.0};
  CHECK(ThrownKind([&] { bad.Validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("metric input errors") {
  const std::vector<double> s = {0.1, 0.2};
  CHECK(ThrownKind([&] { Eer(s, {true, true}); }) ==
        ErrorKind::kDegenerateLabels);
  CHECK(ThrownKind([&] { Eer(s, {true}); }) == ErrorKind::kShape);
  const std::vector<double> nan = {0.1, std::nan("")};
  CHECK(ThrownKind([&] { Eer(nan, {true, false}); }) == ErrorKind::kFormat);
}

}  // namespace
}  // namespace sv
