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

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "privdep/rng.hpp"
#include "privdep/stats.hpp"
#include "privdep/types.hpp"

// Test-side oracles, independent of the library computation paths.
namespace testutil {

inline privdep::DataMatrix random_matrix(privdep::Rng& rng, int n, int d,
                                         bool integer_ties = false) {
  privdep::DataMatrix data;
  data.values.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      if (integer_ties) {
        data.values(i, j) = static_cast<double>(rng.below(5));
      } else {
        data.values(i, j) = rng.normal();
      }
    }
  }
  return data;
}

inline double sign_of(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;
}

// Definitional O(n^2) Kendall statistic for one column pair.
inline double kendall_pair_oracle(const Eigen::MatrixXd& x, int i, int j) {
  const int n = static_cast<int>(x.rows());
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l < n; ++l) {
      sum += sign_of(x(k, i) - x(l, i)) * sign_of(x(k, j) - x(l, j));
    }
  }
  return sum / (0.5 * n * (n - 1));
}

inline Eigen::VectorXd kendall_oracle(
    const Eigen::MatrixXd& x, const std::vector<std::pair<int, int>>& pairs) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    u[static_cast<Eigen::Index>(c)] =
        kendall_pair_oracle(x, pairs[c].first, pairs[c].second);
  }
  return u;
}

// Leave-one-out replicates by recomputation on the row-deleted matrix.
inline Eigen::MatrixXd kendall_loo_oracle(
    const Eigen::MatrixXd& x, const std::vector<std::pair<int, int>>& pairs) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd loo(n, static_cast<Eigen::Index>(pairs.size()));
  Eigen::MatrixXd reduced(n - 1, x.cols());
  for (int m = 0; m < n; ++m) {
    int row = 0;
    for (int i = 0; i < n; ++i) {
      if (i == m) continue;
      reduced.row(row++) = x.row(i);
    }
    loo.row(m) = kendall_oracle(reduced, pairs).transpose();
  }
  return loo;
}

// Jackknife covariance straight from the definition.
inline Eigen::MatrixXd jackknife_oracle(const Eigen::MatrixXd& loo,
                                        const Eigen::VectorXd& u) {
  const int n = static_cast<int>(loo.rows());
  const int k = static_cast<int>(loo.cols());
  Eigen::MatrixXd zeta = Eigen::MatrixXd::Zero(k, k);
  for (int l = 0; l < n; ++l) {
    const Eigen::VectorXd diff = loo.row(l).transpose() - u;
    zeta += diff * diff.transpose();
  }
  return (n - 1.0) * zeta;
}

// Kolmogorov-Smirnov statistic of draws against N(mean, sd^2).
inline double ks_statistic(std::vector<double> draws, double mean, double sd) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double cdf = privdep::normal_cdf((draws[i] - mean) / sd);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(cdf - lo), std::abs(hi - cdf)));
  }
  return d;
}

// Replaces one row with fresh noise, producing a Hamming-1 neighbor.
inline privdep::DataMatrix replace_row(const privdep::DataMatrix& data,
                                       int row, privdep::Rng& rng) {
  privdep::DataMatrix out = data;
  for (int j = 0; j < out.d(); ++j) out.values(row, j) = rng.normal();
  return out;
}

}  // namespace testutil
