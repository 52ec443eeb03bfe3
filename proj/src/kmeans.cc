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
#include <numeric>
#include <random>
#include <string>

#include "sv/clustering.h"
#include "sv/error.h"
#include "sv/parallel.h"
#include "sv/random.h"

namespace sv {

namespace {

// Rows per GEMM block in the assignment pass. Fixed so that results do not
// depend on the worker count.
constexpr Eigen::Index kAssignBlock = 256;

RowMatrix ToMatrix(const EmbeddingSet& set) {
  RowMatrix x(static_cast<Eigen::Index>(set.size()), set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.row(i);
    for (int j = 0; j < set.dim(); ++j) x(i, j) = row[j];
  }
  return x;
}

std::vector<int> KMeansPlusPlus(const RowMatrix& x, int k, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(std::min<long>(10L * k, n));
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(m);

  std::vector<int> chosen;
  chosen.reserve(k);
  std::vector<char> taken(m, 0);
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<int> first(0, m - 1);
  int next = first(rng);
  for (int c = 0; c < k; ++c) {
    chosen.push_back(pool[next]);
    taken[next] = 1;
    if (c + 1 == k) break;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = (x.row(pool[i]) - x.row(pool[next])).squaredNorm();
      d2[i] = taken[i] ? 0.0 : std::min(d2[i], d);
      total += d2[i];
    }
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double r = u(rng);
      double acc = 0.0;
      next = -1;
      for (int i = 0; i < m; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        next = i;
        if (acc >= r) break;
      }
    } else {
      // Remaining candidates coincide with chosen centers.
      std::vector<int> free;
      for (int i = 0; i < m; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
      next = free[pick(rng)];
    }
  }
  return chosen;
}

}  // namespace

std::vector<int> AssignNearest(const RowMatrix& points, const RowMatrix& centers,
                               int workers) {
  const Eigen::Index n = points.rows();
  const Eigen::VectorXd cnorm = centers.rowwise().squaredNorm();
  std::vector<int> out(static_cast<std::size_t>(n));
  const std::size_t blocks = static_cast<std::size_t>((n + kAssignBlock - 1) / kAssignBlock);
  ParallelFor(blocks, workers, [&](std::size_t b) {
    const Eigen::Index start = static_cast<Eigen::Index>(b) * kAssignBlock;
    const Eigen::Index rows = std::min(kAssignBlock, n - start);
    const RowMatrix dots =
        points.middleRows(start, rows) * centers.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      // |x - c|^2 up to the constant |x|^2.
      int best = 0;
      double best_d = cnorm[0] - 2.0 * dots(i, 0);
      for (Eigen::Index c = 1; c < centers.rows(); ++c) {
        const double d = cnorm[c] - 2.0 * dots(i, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      out[static_cast<std::size_t>(start + i)] = best;
    }
  });
  return out;
}

double Inertia(const RowMatrix& points, const RowMatrix& centers,
               const std::vector<int>& assignments) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centers.row(assignments[i])).squaredNorm();
  }
  return total;
}

KMeansModel MiniBatchKMeans(const EmbeddingSet& embeddings,
                            const KMeansOptions& options) {
  const int n = static_cast<int>(embeddings.size());
  const int k = options.k;
  if (k < 1) throw Error(ErrorKind::kConfig, "k must be >= 1");
  if (n < k) {
    throw Error(ErrorKind::kTooFewPoints, std::to_string(n) +
                                              " points for k = " +
                                              std::to_string(k));
  }
  if (options.batch_size < 1 || options.max_iters < 0) {
    throw Error(ErrorKind::kConfig, "invalid k-means batch size or iterations");
  }
  const RowMatrix x = ToMatrix(embeddings);
  for (int i = 0; i < n; ++i) {
    const double norm = x.row(i).norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      throw Error(ErrorKind::kNorm, embeddings.id(i) + " has norm " +
                                        std::to_string(norm) +
                                        "; k-means expects unit vectors");
    }
  }

  Rng rng(options.seed);
  KMeansModel model;
  model.k = k;
  model.ids = embeddings.ids();
  const std::vector<int> init = KMeansPlusPlus(x, k, rng);
  model.centers.resize(k, x.cols());
  for (int c = 0; c < k; ++c) model.centers.row(c) = x.row(init[c]);

  std::vector<long> counts(k, 0);
  RowMatrix batch;
  std::vector<int> batch_index;
  for (int it = 0; it < options.max_iters; ++it) {
    if (options.batch_size >= n) {
      batch_index.resize(n);
      std::iota(batch_index.begin(), batch_index.end(), 0);
    } else {
      batch_index.resize(options.batch_size);
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int& i : batch_index) i = pick(rng);
    }
    batch.resize(static_cast<Eigen::Index>(batch_index.size()), x.cols());
    for (std::size_t i = 0; i < batch_index.size(); ++i) {
      batch.row(static_cast<Eigen::Index>(i)) = x.row(batch_index[i]);
    }
    const std::vector<int> assign =
        AssignNearest(batch, model.centers, options.workers);
    const RowMatrix before = model.centers;
    for (std::size_t i = 0; i < batch_index.size(); ++i) {
      const int c = assign[i];
      const double eta = 1.0 / static_cast<double>(++counts[c]);
      model.centers.row(c) += eta * (batch.row(static_cast<Eigen::Index>(i)) -
                                     model.centers.row(c));
    }
    model.iterations = it + 1;
    const double movement =
        (model.centers - before).rowwise().norm().sum() / k;
    if (movement < options.tol) break;
  }

  model.assignments = AssignNearest(x, model.centers, options.workers);
  for (int pass = 0; pass < k; ++pass) {
    std::vector<long> members(k, 0);
    for (int a : model.assignments) ++members[a];
    const auto empty = std::find(members.begin(), members.end(), 0L);
    if (empty == members.end()) break;
    // Move the empty center onto the point farthest from its own center,
    // taken from a center that keeps at least one other member.
    int far = -1;
    double far_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (members[model.assignments[i]] < 2) continue;
      const double d =
          (x.row(i) - model.centers.row(model.assignments[i])).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) break;
    model.centers.row(empty - members.begin()) = x.row(far);
    model.assignments = AssignNearest(x, model.centers, options.workers);
  }
  model.inertia = Inertia(x, model.centers, model.assignments);
  return model;
}

}  // namespace sv
