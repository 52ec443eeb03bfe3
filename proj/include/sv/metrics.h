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

#ifndef SV_METRICS_H_
#define SV_METRICS_H_

#include <span>
#include <vector>

namespace sv {

struct DcfParams {
  double p_target = 0.05;
  double c_miss = 1.0;
  double c_fa = 1.0;

  // Throws ConfigError unless p_target is in (0, 1) and both costs are > 0.
  void Validate() const;
};

// Operating points at the distinct scores plus -inf and +inf, ascending.
// A trial is accepted when its score is >= the threshold.
struct DetCurve {
  std::vector<double> thresholds;
  std::vector<double> fa_rates;
  std::vector<double> miss_rates;
};

// Throws DegenerateLabels unless both classes are present, ShapeError on a
// length mismatch.
DetCurve ComputeDetCurve(std::span<const double> scores,
                         const std::vector<bool>& labels);

struct EerPoint {
  double eer = 0.0;        // fraction in [0, 1]
  double threshold = 0.0;  // first threshold where miss >= fa
};

// Linear interpolation between the two DET points bracketing miss = fa.
EerPoint EerFromCurve(const DetCurve& curve);
double Eer(std::span<const double> scores, const std::vector<bool>& labels);

// Normalized detection cost of one operating point.
double NormalizedDcf(double miss, double fa, const DcfParams& params);
double MinDcfFromCurve(const DetCurve& curve, const DcfParams& params);
double MinDcf(std::span<const double> scores, const std::vector<bool>& labels,
              const DcfParams& params = {});

struct Metrics {
  double eer = 0.0;
  double min_dcf = 0.0;
  double threshold = 0.0;
};

Metrics Evaluate(std::span<const double> scores,
                 const std::vector<bool>& labels, const DcfParams& params = {});

}  // namespace sv

#endif  // SV_METRICS_H_
