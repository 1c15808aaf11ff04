//
// Copyright 2026 The privdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "privdep/rng.hpp"
#include "privdep/types.hpp"

namespace privdep {

// A symmetric kernel of order `order` mapping `order` rows of a DataMatrix
// to `output_dim` components, each bounded by `bound` in absolute value.
//
// For pairwise dependence kernels, `index_map` maps each output coordinate to
// a 0-based column pair (i, j), i < j, in vech order (columns above the
// diagonal stacked column by column). `band_gap` >= 2 retains only the pairs
// with j - i >= band_gap.
struct KernelSpec {
  int order = 1;
  double bound = 1.0;
  int output_dim = 0;
  int data_dim = 0;
  std::function<void(const DataMatrix&, std::span<const int>,
                     std::span<double>)>
      evaluate;
  std::vector<std::pair<int, int>> index_map;
  int band_gap = 0;
  // Enables the O(n log n) per-pair inversion-count path plus O(n) per-row
  // pair-sum downdating for leave-one-out replicates.
  bool kendall = false;
};

// Kendall's tau kernel: order 2, bound 1, one coordinate per retained column
// pair. Coordinate (i, j) averages sign(x_1i - x_2i) * sign(x_1j - x_2j)
// over all row pairs.
KernelSpec kendall_kernel(int data_dim, int band_gap = 0);

struct UStatResult {
  Eigen::VectorXd u;                             // length p
  std::optional<Eigen::MatrixXd> leave_one_out;  // n x p, row l is U^(l)
  int n = 0;
  int order = 0;
  double bound = 0.0;
};

// Exact U-statistic: U_j is the average of h_j over all C(n, r) row subsets.
// With `with_leave_one_out`, row l of the replicate matrix is the same
// statistic recomputed without row l (requires n >= r + 1).
UStatResult compute_ustat(const DataMatrix& data, const KernelSpec& kernel,
                          bool with_leave_one_out = false);

// Leave-one-out replicates restricted to a subset of output coordinates;
// returns an n x coords.size() matrix.
Eigen::MatrixXd leave_one_out_columns(const DataMatrix& data,
                                      const KernelSpec& kernel,
                                      std::span<const int> coords);

struct JackknifeCov {
  Eigen::MatrixXd zeta;       // k x k, exactly symmetric
  std::vector<int> indices;   // covered coordinates (0-based)
};

// Jackknife covariance (n-1) * sum_l (U^(l) - U)(U^(l) - U)^T restricted to
// the given coordinates. Estimates n * Cov(U); for the order-1 mean kernel
// it equals the sample variance.
JackknifeCov jackknife_cov(const UStatResult& result,
                           std::span<const int> indices);

// Same, computing the needed leave-one-out columns on the fly.
JackknifeCov jackknife_cov(const DataMatrix& data, const KernelSpec& kernel,
                           const Eigen::VectorXd& u,
                           std::span<const int> indices);

// l2/linf sensitivity of each U coordinate and of ||U||_inf under one-row
// replacement: 2 r L_inf / n.
double ustat_sensitivity(const KernelSpec& kernel, int n);

// l2 sensitivity of the jackknife covariance restricted to k coordinates
// under one-row replacement. Binomial ratios are evaluated in log space.
double jackknife_sensitivity(const KernelSpec& kernel, int n, int k);

// Adds iid N(0, sd^2) to every entry; breaks ties within columns almost
// surely. Entries are perturbed in row-major order for determinism.
DataMatrix tie_jitter(const DataMatrix& data, double sd, Rng& rng);

}  // namespace privdep
