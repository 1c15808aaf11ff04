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

#include "privdep/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace privdep {

namespace {

// Substream ids inside p_rel; the subselection stream is separate so the
// testing branch stays reproducible whatever the selector consumed.
constexpr std::uint64_t kStreamNoisyMax = 0;
constexpr std::uint64_t kStreamPtr = 1;
constexpr std::uint64_t kStreamSubselect = 2;

std::vector<int> order_by_abs_descending(const Eigen::VectorXd& u) {
  std::vector<int> order(static_cast<std::size_t>(u.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = std::abs(u[a]);
    const double fb = std::abs(u[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  return order;
}

GapVector gaps_impl(const Eigen::VectorXd& u, bool clip, double clip_at) {
  if (u.size() < 2) throw std::invalid_argument("gaps: need p >= 2");
  GapVector g;
  g.order = order_by_abs_descending(u);
  g.q.resize(static_cast<std::size_t>(u.size()) - 1);
  for (std::size_t j = 0; j + 1 < g.order.size(); ++j) {
    double hi = std::abs(u[g.order[j]]);
    double lo = std::abs(u[g.order[j + 1]]);
    if (clip) {
      hi = std::max(hi, clip_at);
      lo = std::max(lo, clip_at);
    }
    g.q[j] = hi - lo;
  }
  return g;
}

ExtremalEstimate p_rel_on_gaps(const GapVector& gap, const KernelSpec& kernel,
                               int n, double rho, double delta, Rng& rng,
                               PrivacyBudget* budget,
                               const std::function<double(int)>& regularizer) {
  if (!(rho > 0.0)) throw std::invalid_argument("p_rel: rho must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("p_rel: delta must be in (0, 1)");
  }
  const int p = static_cast<int>(gap.order.size());
  const double t = 2.0 * ustat_sensitivity(kernel, n);  // 4 r L_inf / n
  const double epsilon = 2.0 * std::sqrt(rho);

  Rng noisy_max_rng = rng.substream(kStreamNoisyMax);
  const int gap_index =
      rl_gap(gap.q, epsilon, t, regularizer, noisy_max_rng, budget);
  const int k_hat = gap_index + 1;

  Rng ptr_rng = rng.substream(kStreamPtr);
  const PtrResult ptr = ptr_lower_bound(gap.q[static_cast<std::size_t>(gap_index)],
                                        t, rho, delta, ptr_rng, budget);

  ExtremalEstimate estimate;
  estimate.k_hat = k_hat;
  if (!ptr.passed) return estimate;

  estimate.bottom = false;
  const int cap = extremal_cap(p);
  if (k_hat <= cap) {
    estimate.indices.assign(gap.order.begin(), gap.order.begin() + k_hat);
    return estimate;
  }
  // Random thinning to the cap keeps private covariance estimation feasible.
  estimate.truncated = true;
  Rng pick_rng = rng.substream(kStreamSubselect);
  std::vector<int> pool(gap.order.begin(), gap.order.begin() + k_hat);
  for (int j = 0; j < cap; ++j) {
    const std::uint64_t swap_with =
        static_cast<std::uint64_t>(j) +
        pick_rng.below(static_cast<std::uint64_t>(k_hat - j));
    std::swap(pool[static_cast<std::size_t>(j)],
              pool[static_cast<std::size_t>(swap_with)]);
  }
  pool.resize(static_cast<std::size_t>(cap));
  estimate.indices = std::move(pool);
  return estimate;
}

}  // namespace

GapVector gaps(const Eigen::VectorXd& u) { return gaps_impl(u, false, 0.0); }

GapVector clipped_gaps(const Eigen::VectorXd& u, double clip) {
  if (!(clip > 0.0)) throw std::invalid_argument("clipped_gaps: clip must be > 0");
  return gaps_impl(u, true, clip);
}

std::vector<int> nonprivate_extremal(const Eigen::VectorXd& u, int n) {
  if (u.size() < 1) throw std::invalid_argument("nonprivate_extremal: p >= 1");
  if (n < 1) throw std::invalid_argument("nonprivate_extremal: n >= 1");
  const double p = static_cast<double>(u.size());
  const double margin = std::sqrt(std::log(p) * std::log(static_cast<double>(n)) / n);
  const double cutoff = u.cwiseAbs().maxCoeff() - margin;
  std::vector<int> selected;
  for (int i = 0; i < static_cast<int>(u.size()); ++i) {
    if (std::abs(u[i]) >= cutoff) selected.push_back(i);
  }
  return selected;
}

int extremal_cap(int p) {
  if (p < 2) throw std::invalid_argument("extremal_cap: need p >= 2");
  return static_cast<int>(std::ceil(std::log(static_cast<double>(p))));
}

ExtremalEstimate p_rel(const Eigen::VectorXd& u, const KernelSpec& kernel,
                       int n, double rho, double delta, Rng& rng,
                       PrivacyBudget* budget,
                       const std::function<double(int)>& regularizer) {
  return p_rel_on_gaps(gaps(u), kernel, n, rho, delta, rng, budget,
                       regularizer);
}

ExtremalEstimate relevant_set(const Eigen::VectorXd& u, double Delta,
                              const KernelSpec& kernel, int n, double rho,
                              double delta, Rng& rng, PrivacyBudget* budget,
                              const std::function<double(int)>& regularizer) {
  return p_rel_on_gaps(clipped_gaps(u, Delta), kernel, n, rho, delta, rng,
                       budget, regularizer);
}

std::function<double(int)> linear_regularizer(double c, int n) {
  return [c, n](int j) {
    return c * (1.0 - static_cast<double>(j + 1) / static_cast<double>(n));
  };
}

}  // namespace privdep
