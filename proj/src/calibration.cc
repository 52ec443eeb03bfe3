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

#include <cmath>
#include <string>

#include "binary_io.h"
#include "sv/backend.h"
#include "sv/error.h"
#include "text_util.h"

namespace sv {

namespace {

constexpr char kModelHeader[] = "w0\tw1\tw2\tq_mean\tq_std";

double Duration(const DurationMap& durations, const std::string& id) {
  auto it = durations.find(id);
  if (it == durations.end()) {
    throw Error(ErrorKind::kUnknownUtterance, "no duration for " + id);
  }
  return it->second;
}

void MeanStd(const std::vector<double>& v, double* mean, double* std) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= static_cast<double>(v.size());
  *mean = m;
  *std = var > 0.0 ? std::sqrt(var) : 1.0;
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> TrialQualities(const ScoreSet& scores,
                                   const DurationMap& durations) {
  std::vector<double> q(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    q[i] = std::min(Duration(durations, scores.entries[i].enroll),
                    Duration(durations, scores.entries[i].test));
  }
  return q;
}

CalibrationModel TrainCalibration(const ScoreSet& scores,
                                  const std::vector<bool>& labels,
                                  const DurationMap& durations,
                                  const CalibrationOptions& options,
                                  std::vector<double>* loss_trace) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kShape, "scores and labels differ in length");
  }
  std::size_t n_target = 0;
  for (bool l : labels) n_target += l;
  if (n_target == 0 || n_target == labels.size()) {
    throw Error(ErrorKind::kDegenerateLabels,
                "calibration needs both target and non-target trials");
  }
  const std::size_t n = scores.size();
  const std::vector<double> q = TrialQualities(scores, durations);
  const std::vector<double> s = scores.scores();
  CalibrationModel model;
  MeanStd(q, &model.quality_mean, &model.quality_std);
  // The score is standardized as well for conditioning; the fitted weights
  // are mapped back onto raw scores at the end.
  double s_mean = 0.0, s_std = 1.0;
  MeanStd(s, &s_mean, &s_std);
  std::vector<double> xs(n), xq(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (s[i] - s_mean) / s_std;
    xq[i] = (q[i] - model.quality_mean) / model.quality_std;
    y[i] = labels[i] ? 1.0 : 0.0;
  }

  auto objective = [&](const double w[3]) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = w[0] + w[1] * xs[i] + w[2] * xq[i];
      loss += Softplus(z) - y[i] * z;
    }
    return loss / n + options.l2 * (w[1] * w[1] + w[2] * w[2]);
  };
  const double prior = static_cast<double>(n_target) / n;
  double w[3] = {std::log(prior / (1.0 - prior)), 0.0, 0.0};
  double loss = objective(w);
  double lr = options.learning_rate;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    double g[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double r = Sigmoid(w[0] + w[1] * xs[i] + w[2] * xq[i]) - y[i];
      g[0] += r;
      g[1] += r * xs[i];
      g[2] += r * xq[i];
    }
    g[0] /= n;
    g[1] = g[1] / n + 2.0 * options.l2 * w[1];
    g[2] = g[2] / n + 2.0 * options.l2 * w[2];
    if (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] < 1e-24) break;
    const double next[3] = {w[0] - lr * g[0], w[1] - lr * g[1],
                            w[2] - lr * g[2]};
    const double next_loss = objective(next);
    if (next_loss > loss) {
      lr *= 0.5;
    } else {
      std::copy(next, next + 3, w);
      loss = next_loss;
    }
    if (loss_trace) loss_trace->push_back(loss);
  }
  model.w1 = w[1] / s_std;
  model.w0 = w[0] - model.w1 * s_mean;
  model.w2 = w[2];
  return model;
}

ScoreSet ApplyCalibration(const CalibrationModel& model, const ScoreSet& scores,
                          const DurationMap& durations) {
  const std::vector<double> q = TrialQualities(scores, durations);
  ScoreSet out = scores;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double qn = (q[i] - model.quality_mean) / model.quality_std;
    out.entries[i].score =
        model.w0 + model.w1 * scores.entries[i].score + model.w2 * qn;
  }
  return out;
}

void WriteCalibrationModel(const CalibrationModel& model,
                           const std::string& path) {
  using internal::FormatDouble;
  auto os = internal::OpenForWrite(path);
  os << kModelHeader << '\n'
     << FormatDouble(model.w0) << '\t' << FormatDouble(model.w1) << '\t'
     << FormatDouble(model.w2) << '\t' << FormatDouble(model.quality_mean)
     << '\t' << FormatDouble(model.quality_std) << '\n';
  internal::FinishWrite(os, path);
}

CalibrationModel ReadCalibrationModel(const std::string& path) {
  auto is = internal::OpenForRead(path);
  std::string header, values;
  if (!std::getline(is, header) ||
      internal::StripCr(header) != std::string_view(kModelHeader)) {
    throw internal::ParseErrorAt(path, 1, "bad calibration model header");
  }
  if (!std::getline(is, values)) {
    throw internal::ParseErrorAt(path, 2, "missing calibration values");
  }
  const auto f = internal::SplitTabs(internal::StripCr(values));
  if (f.size() != 5) throw internal::ParseErrorAt(path, 2, "expected 5 fields");
  double v[5];
  for (int i = 0; i < 5; ++i) {
    const auto x = internal::ParseDouble(f[i]);
    if (!x || !std::isfinite(*x)) {
      throw internal::ParseErrorAt(path, 2, "bad value");
    }
    v[i] = *x;
  }
  if (!(v[4] > 0.0)) throw internal::ParseErrorAt(path, 2, "q_std must be > 0");
  return {v[0], v[1], v[2], v[3], v[4]};
}

}  // namespace sv
