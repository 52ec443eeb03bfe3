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
#include <limits>
#include <string>
#include <unordered_map>

#include "sv/clustering.h"
#include "sv/error.h"

namespace sv {

Linkage ParseLinkage(std::string_view name) {
  if (name == "single") return Linkage::kSingle;
  if (name == "complete") return Linkage::kComplete;
  if (name == "average") return Linkage::kAverage;
  throw Error(ErrorKind::kConfig, "unknown linkage " + std::string(name));
}

namespace {

// Upper-triangular distance storage, i < j.
class CondensedMatrix {
 public:
  explicit CondensedMatrix(std::size_t n)
      : n_(n), data_(n * (n - 1) / 2, 0.0) {}

  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return data_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

}  // namespace

std::vector<int> Ahc(const RowMatrix& centers, int n_clusters,
                     Linkage linkage) {
  const int n = static_cast<int>(centers.rows());
  if (n_clusters < 1 || n_clusters > n) {
    throw Error(ErrorKind::kConfig, "n_clusters " + std::to_string(n_clusters) +
                                        " outside [1, " + std::to_string(n) +
                                        "]");
  }
  std::vector<int> owner(n);
  for (int i = 0; i < n; ++i) owner[i] = i;
  if (n_clusters < n) {
    const Eigen::VectorXd norms = centers.rowwise().norm();
    if ((norms.array() == 0.0).any()) {
      throw Error(ErrorKind::kNorm, "zero vector in AHC input");
    }
    const RowMatrix unit = norms.cwiseInverse().asDiagonal() * centers;
    const RowMatrix sims = unit * unit.transpose();
    CondensedMatrix dist(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) dist.at(i, j) = 1.0 - sims(i, j);
    }

    std::vector<char> active(n, 1);
    std::vector<long> size(n, 1);
    std::vector<int> nn(n, -1);
    std::vector<double> nn_d(n, std::numeric_limits<double>::infinity());
    auto refresh = [&](int i) {
      nn[i] = -1;
      nn_d[i] = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (j == i || !active[j]) continue;
        const double d = dist.at(i, j);
        if (d < nn_d[i]) {
          nn_d[i] = d;
          nn[i] = j;
        }
      }
    };
    for (int i = 0; i < n; ++i) refresh(i);

    for (int remaining = n; remaining > n_clusters; --remaining) {
      // The lowest i attaining the global minimum pairs with its lowest
      // nearest neighbor, which is the lexicographically smallest pair.
      int a = -1;
      for (int i = 0; i < n; ++i) {
        if (active[i] && (a < 0 || nn_d[i] < nn_d[a])) a = i;
      }
      const int b = nn[a];
      const int keep = std::min(a, b);
      const int drop = std::max(a, b);
      for (int k = 0; k < n; ++k) {
        if (!active[k] || k == keep || k == drop) continue;
        const double dk = dist.at(keep, k);
        const double dd = dist.at(drop, k);
        double merged = 0.0;
        switch (linkage) {
          case Linkage::kSingle: merged = std::min(dk, dd); break;
          case Linkage::kComplete: merged = std::max(dk, dd); break;
          case Linkage::kAverage:
            merged = (size[keep] * dk + size[drop] * dd) /
                     static_cast<double>(size[keep] + size[drop]);
            break;
        }
        dist.at(keep, k) = merged;
      }
      size[keep] += size[drop];
      active[drop] = 0;
      owner[drop] = keep;
      refresh(keep);
      for (int k = 0; k < n; ++k) {
        if (!active[k] || k == keep) continue;
        if (nn[k] == keep || nn[k] == drop) {
          refresh(k);
        } else {
          const double d = dist.at(keep, k);
          if (d < nn_d[k] || (d == nn_d[k] && keep < nn[k])) {
            nn_d[k] = d;
            nn[k] = keep;
          }
        }
      }
    }
  }
  std::vector<int> labels(n);
  std::unordered_map<int, int> numbering;
  for (int i = 0; i < n; ++i) {
    int root = i;
    while (owner[root] != root) root = owner[root];
    auto it = numbering.emplace(root, static_cast<int>(numbering.size())).first;
    labels[i] = it->second;
  }
  return labels;
}

}  // namespace sv
