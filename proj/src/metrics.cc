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

#include "sv/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sv/error.h"

namespace sv {

void DcfParams::Validate() const {
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw Error(ErrorKind::kConfig, "p_target must be in (0, 1)");
  }
  if (!(c_miss > 0.0) || !(c_fa > 0.0)) {
    throw Error(ErrorKind::kConfig, "DCF costs must be > 0");
  }
}

DetCurve ComputeDetCurve(std::span<const double> scores,
                         const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kShape, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorKind::kFormat, "NaN score");
  }
  std::size_t n_target = 0;
  for (bool l : labels) n_target += l;
  const std::size_t n_nontarget = n - n_target;
  if (n_target == 0 || n_nontarget == 0) {
    throw Error(ErrorKind::kDegenerateLabels,
                "need at least one target and one non-target trial");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  constexpr double kInf = std::numeric_limits<double>::infinity();
  DetCurve curve;
  // Counts of trials strictly below the current threshold.
  std::size_t targets_below = 0;
  std::size_t nontargets_below = 0;
  auto push = [&](double t) {
    curve.thresholds.push_back(t);
    curve.miss_rates.push_back(static_cast<double>(targets_below) / n_target);
    curve.fa_rates.push_back(static_cast<double>(n_nontarget - nontargets_below) /
                             n_nontarget);
  };
  push(-kInf);
  std::size_t i = 0;
  while (i < n) {
    const double t = scores[order[i]];
    push(t);
    while (i < n && scores[order[i]] == t) {
      if (labels[order[i]]) {
        ++targets_below;
      } else {
        ++nontargets_below;
      }
      ++i;
    }
  }
  push(kInf);
  return curve;
}

EerPoint EerFromCurve(const DetCurve& curve) {
  const auto& miss = curve.miss_rates;
  const auto& fa = curve.fa_rates;
  std::size_t i = 0;
  while (miss[i] < fa[i]) ++i;  // terminates: the last point has miss 1, fa 0
  EerPoint out;
  out.threshold = curve.thresholds[i];
  if (miss[i] == fa[i] || i == 0) {
    out.eer = miss[i];
    return out;
  }
  const double d0 = fa[i - 1] - miss[i - 1];
  const double d1 = miss[i] - fa[i];
  const double alpha = d0 / (d0 + d1);
  out.eer = miss[i - 1] + alpha * (miss[i] - miss[i - 1]);
  return out;
}

double Eer(std::span<const double> scores, const std::vector<bool>& labels) {
  return EerFromCurve(ComputeDetCurve(scores, labels)).eer;
}

double NormalizedDcf(double miss, double fa, const DcfParams& params) {
  const double a = params.c_miss * params.p_target;
  const double b = params.c_fa * (1.0 - params.p_target);
  return (a * miss + b * fa) / std::min(a, b);
}

double MinDcfFromCurve(const DetCurve& curve, const DcfParams& params) {
  params.Validate();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    best = std::min(best,
                    NormalizedDcf(curve.miss_rates[i], curve.fa_rates[i], params));
  }
  return best;
}

double MinDcf(std::span<const double> scores, const std::vector<bool>& labels,
              const DcfParams& params) {
  return MinDcfFromCurve(ComputeDetCurve(scores, labels), params);
}

Metrics Evaluate(std::span<const double> scores,
                 const std::vector<bool>& labels, const DcfParams& params) {
  const DetCurve curve = ComputeDetCurve(scores, labels);
  const EerPoint e = EerFromCurve(curve);
  return {e.eer, MinDcfFromCurve(curve, params), e.threshold};
}

}  // namespace sv
