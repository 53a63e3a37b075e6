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

// Spectral clustering of depth coordinates into photographic rows.

#ifndef DOPPLERTAG_CLUSTER_ROWS_H_
#define DOPPLERTAG_CLUSTER_ROWS_H_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dopplertag::cluster {

inline constexpr double kDefaultAffinityScale = 1.0;  // m
inline constexpr int kMaxKMeansIterations = 200;

struct AffinitySet {
  Eigen::MatrixXd w;    // exp(-((y_i - y_j) / scale)^2)
  Eigen::VectorXd d;    // degrees, diagonal of D
  Eigen::MatrixXd lap;  // D - W
};

// Throws PreconditionError on empty input or non-positive scale.
AffinitySet BuildLaplacian(std::span<const double> ys,
                           double scale = kDefaultAffinityScale);

// Ascending eigenvalues of the Laplacian.
Eigen::VectorXd LaplacianSpectrum(const AffinitySet& aff);

// Eigengap heuristic over k = 1..k_max (clamped to n - 1); 1 when every gap
// is below 1e-9.
int EstimateRowCount(const AffinitySet& aff, int k_max);

struct RowAssignment {
  std::vector<int> labels;        // row per input, 0 = nearest
  std::vector<int> row_order;     // identity after the canonical remap
  std::vector<double> row_means;  // ascending
  bool converged = true;
};

// k = nullopt picks k by EstimateRowCount with k_max = n. Throws
// PreconditionError when k is outside [1, n].
RowAssignment ClusterRows(std::span<const double> ys, std::optional<int> k,
                          double scale = kDefaultAffinityScale,
                          std::optional<int> k_max = std::nullopt);

}  // namespace dopplertag::cluster

#endif  // DOPPLERTAG_CLUSTER_ROWS_H_
