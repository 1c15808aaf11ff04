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
#include <vector>

#include "privdep/privacy.hpp"
#include "privdep/rng.hpp"
#include "privdep/ustat.hpp"

namespace privdep {

// Consecutive differences of the ordered |U| values, plus the ordering.
struct GapVector {
  std::vector<double> q;     // length p-1, q[j] = |U|_(j+1) - |U|_(j+2) >= 0
  std::vector<int> order;    // coordinates by |U| descending, ties by index
};

GapVector gaps(const Eigen::VectorXd& u);

// Delta-clipped gap queries max{|U|_(j), Delta} - max{|U|_(j+1), Delta};
// gaps among coordinates below Delta collapse to zero.
GapVector clipped_gaps(const Eigen::VectorXd& u, double clip);

// Canonical non-private extremal-set estimate:
// { i : |U_i| >= ||U||_inf - sqrt(log(p) log(n) / n) }.
std::vector<int> nonprivate_extremal(const Eigen::VectorXd& u, int n);

// Cardinality cap ceil(ln p) for the private estimate.
int extremal_cap(int p);

struct ExtremalEstimate {
  bool bottom = true;         // the failure sentinel
  std::vector<int> indices;   // 0-based coordinates, |U|-descending
  int k_hat = 0;              // gap index selected by the noisy-max step
  bool truncated = false;     // random subselection applied
};

// Adaptive private estimation of the extremal set. Selects the gap index by
// regularized report-noisy-max (epsilon = 2 sqrt(rho), costs rho/2), then
// verifies the selected gap clears t = 4 r L_inf / n through a
// propose-test-release lower bound (costs rho/2 and delta). On success
// returns the top-k_hat coordinates, randomly thinned to ceil(ln p) when
// k_hat is larger; otherwise bottom.
ExtremalEstimate p_rel(const Eigen::VectorXd& u, const KernelSpec& kernel,
                       int n, double rho, double delta, Rng& rng,
                       PrivacyBudget* budget,
                       const std::function<double(int)>& regularizer = nullptr);

// Same procedure on the Delta-clipped queries; the returned set estimates
// the relevant coordinates { i : |theta_i| > Delta }.
ExtremalEstimate relevant_set(const Eigen::VectorXd& u, double Delta,
                              const KernelSpec& kernel, int n, double rho,
                              double delta, Rng& rng, PrivacyBudget* budget,
                              const std::function<double(int)>& regularizer =
                                  nullptr);

// Linear index penalty nu(j) = c (1 - j / n) for the noisy-max step,
// overweighting gaps between larger coordinates.
std::function<double(int)> linear_regularizer(double c, int n);

}  // namespace privdep
