// Copyright 2026 The Dopplertag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dopplertag/cluster_rows.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "dopplertag/errors.h"

namespace dopplertag::cluster {

AffinitySet BuildLaplacian(std::span<const double> ys, double scale) {
  if (ys.empty()) throw PreconditionError("build_laplacian: no depths");
  if (!(scale > 0.0)) throw PreconditionError("build_laplacian: scale must be positive");
  const auto n = static_cast<Eigen::Index>(ys.size());
  AffinitySet aff;
  aff.w.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    aff.w(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double z = (ys[i] - ys[j]) / scale;
      aff.w(i, j) = aff.w(j, i) = std::exp(-z * z);
    }
  }
  aff.d = aff.w.rowwise().sum();
  aff.lap = -aff.w;
  aff.lap.diagonal() += aff.d;
  return aff;
}

Eigen::VectorXd LaplacianSpectrum(const AffinitySet& aff) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aff.lap, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

int EstimateRowCount(const AffinitySet& aff, int k_max) {
  if (k_max < 1) throw PreconditionError("estimate_row_count: k_max must be >= 1");
  const Eigen::VectorXd lambda = LaplacianSpectrum(aff);
  const int n = static_cast<int>(lambda.size());
  const int top = std::min(k_max, n - 1);
  int best = 1;
  double best_gap = 1e-9;
  for (int k = 1; k <= top; ++k) {
    const double gap = lambda(k) - lambda(k - 1);
    if (gap > best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  return best;
}

RowAssignment ClusterRows(std::span<const double> ys, std::optional<int> k,
                          double scale, std::optional<int> k_max) {
  const AffinitySet aff = BuildLaplacian(ys, scale);
  const int n = static_cast<int>(ys.size());
  const int rows = k ? *k : EstimateRowCount(aff, k_max.value_or(n));
  if (rows < 1 || rows > n) throw PreconditionError("cluster_rows: k must lie in [1, n]");

  RowAssignment out;
  std::vector<int> labels(n, 0);
  if (rows > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aff.lap);
    const Eigen::MatrixXd emb = es.eigenvectors().leftCols(rows);

    // Quantiles of the Fiedler coordinate.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return emb(a, 1) < emb(b, 1); });
    Eigen::MatrixXd quantile(rows, rows);
    for (int c = 0; c < rows; ++c) {
      const int q = static_cast<int>(std::lround((c + 0.5) * n / rows - 0.5));
      quantile.row(c) = emb.row(idx[std::clamp(q, 0, n - 1)]);
    }
    // Tight, well-separated rows give a near-degenerate null space whose
    // Fiedler vector may not split every row, so farthest-point seeding from
    // the lowest quantile is tried as well; the lower inertia wins.
    Eigen::MatrixXd farthest(rows, rows);
    farthest.row(0) = emb.row(idx.front());
    for (int c = 1; c < rows; ++c) {
      int pick = 0;
      double pick_d = -1.0;
      for (int i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int j = 0; j < c; ++j) {
          nearest = std::min(nearest, (emb.row(i) - farthest.row(j)).squaredNorm());
        }
        if (nearest > pick_d + 1e-12) {
          pick_d = nearest;
          pick = i;
        }
      }
      farthest.row(c) = emb.row(pick);
    }

    struct Result {
      std::vector<int> labels;
      double inertia = 0.0;
      bool converged = false;
    };
    auto kmeans = [&](Eigen::MatrixXd centroids) {
      Result r;
      r.labels.assign(n, -1);
      for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
        bool changed = false;
        r.inertia = 0.0;
        for (int i = 0; i < n; ++i) {
          int best = 0;
          double best_d = std::numeric_limits<double>::infinity();
          for (int c = 0; c < rows; ++c) {
            const double dist = (emb.row(i) - centroids.row(c)).squaredNorm();
            if (dist < best_d) {
              best_d = dist;
              best = c;
            }
          }
          if (r.labels[i] != best) changed = true;
          r.labels[i] = best;
          r.inertia += best_d;
        }
        if (!changed) {
          r.converged = true;
          break;
        }
        for (int c = 0; c < rows; ++c) {
          Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(rows);
          int count = 0;
          for (int i = 0; i < n; ++i) {
            if (r.labels[i] == c) {
              sum += emb.row(i);
              ++count;
            }
          }
          if (count > 0) centroids.row(c) = sum / count;
        }
      }
      return r;
    };
    Result a = kmeans(quantile);
    Result b = kmeans(farthest);
    const Result& best = b.inertia < a.inertia - 1e-12 ? b : a;
    labels = best.labels;
    out.converged = best.converged;
  }

  // Canonical remap: rows by ascending mean depth; empty clusters vanish.
  std::vector<double> sums(rows, 0.0);
  std::vector<int> counts(rows, 0);
  for (int i = 0; i < n; ++i) {
    sums[labels[i]] += ys[i];
    counts[labels[i]] += 1;
  }
  std::vector<int> used;
  for (int c = 0; c < rows; ++c) if (counts[c] > 0) used.push_back(c);
  std::stable_sort(used.begin(), used.end(), [&](int a, int b) {
    return sums[a] / counts[a] < sums[b] / counts[b];
  });
  std::vector<int> remap(rows, -1);
  for (std::size_t r = 0; r < used.size(); ++r) {
    remap[used[r]] = static_cast<int>(r);
    out.row_means.push_back(sums[used[r]] / counts[used[r]]);
    out.row_order.push_back(static_cast<int>(r));
  }
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) out.labels[i] = remap[labels[i]];
  return out;
}

}  // namespace dopplertag::cluster
