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

#include "privdep/privacy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "privdep/stats.hpp"

namespace privdep {

namespace {

// Slack absorbing float rounding when equal budget shares are recombined
// (rho/6 + rho/6 need not be bit-equal to rho/3).
constexpr double kBudgetSlack = 1e-9;

}  // namespace

PrivacyBudget::PrivacyBudget(double rho, double delta)
    : rho_(rho), delta_(delta) {
  if (rho < 0.0) throw std::invalid_argument("PrivacyBudget: rho < 0");
  if (delta < 0.0 || delta >= 1.0) {
    throw std::invalid_argument("PrivacyBudget: delta must be in [0, 1)");
  }
}

void PrivacyBudget::debit(std::string_view mechanism, double rho_cost,
                          double delta_cost) {
  if (rho_cost < 0.0 || delta_cost < 0.0) {
    throw std::invalid_argument("PrivacyBudget: negative debit");
  }
  std::lock_guard<std::mutex> lock(mu_);
  const double rho_slack = kBudgetSlack * std::max(1.0, rho_);
  const double delta_slack = kBudgetSlack * std::max(1.0, delta_);
  if (rho_spent_ + rho_cost > rho_ + rho_slack ||
      delta_spent_ + delta_cost > delta_ + delta_slack) {
    throw BudgetExhaustedError(
        std::string("privacy budget exhausted by ") + std::string(mechanism));
  }
  rho_spent_ += rho_cost;
  delta_spent_ += delta_cost;
  ledger_.push_back(Entry{std::string(mechanism), rho_cost, delta_cost});
}

double PrivacyBudget::rho_spent() const {
  std::lock_guard<std::mutex> lock(mu_);
  return rho_spent_;
}

double PrivacyBudget::delta_spent() const {
  std::lock_guard<std::mutex> lock(mu_);
  return delta_spent_;
}

std::vector<PrivacyBudget::Entry> PrivacyBudget::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return ledger_;
}

double gaussian_sigma(double l2_sensitivity, double rho) {
  if (!(l2_sensitivity > 0.0)) {
    throw std::invalid_argument("gaussian_sigma: sensitivity must be > 0");
  }
  if (!(rho > 0.0)) throw std::invalid_argument("gaussian_sigma: rho must be > 0");
  return l2_sensitivity / std::sqrt(2.0 * rho);
}

double gaussian_mechanism(double value, double l2_sensitivity, double rho,
                          Rng& rng, PrivacyBudget* budget) {
  const double sigma = gaussian_sigma(l2_sensitivity, rho);
  if (budget != nullptr) budget->debit("gaussian", rho);
  return value + sigma * rng.normal();
}

Eigen::VectorXd gaussian_mechanism(const Eigen::VectorXd& value,
                                   double l2_sensitivity, double rho, Rng& rng,
                                   PrivacyBudget* budget) {
  const double sigma = gaussian_sigma(l2_sensitivity, rho);
  if (budget != nullptr) budget->debit("gaussian", rho);
  Eigen::VectorXd out = value;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

NoisyRelease gaussian_release(const Eigen::VectorXd& value,
                              double l2_sensitivity, double rho, Rng& rng,
                              PrivacyBudget* budget) {
  NoisyRelease release;
  release.sigma = gaussian_sigma(l2_sensitivity, rho);
  release.mechanism = "gaussian";
  release.value = gaussian_mechanism(value, l2_sensitivity, rho, rng, budget);
  return release;
}

int rl_gap(std::span<const double> q, double epsilon, double l1_sensitivity,
           const std::function<double(int)>& regularizer, Rng& rng,
           PrivacyBudget* budget) {
  if (q.empty()) throw std::invalid_argument("rl_gap: empty query vector");
  if (!(epsilon > 0.0)) throw std::invalid_argument("rl_gap: epsilon must be > 0");
  const bool noiseless = std::isinf(epsilon);
  if (budget != nullptr) budget->debit("rl-gap", epsilon * epsilon / 8.0);
  const double scale = 2.0 * l1_sensitivity / epsilon;
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < static_cast<int>(q.size()); ++j) {
    double score = q[static_cast<std::size_t>(j)];
    if (regularizer) score += regularizer(j);
    if (!noiseless && scale > 0.0) score += rng.gumbel(scale);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

PtrResult ptr_lower_bound(double q_value, double t, double rho, double delta,
                          Rng& rng, PrivacyBudget* budget) {
  if (!(t > 0.0)) throw std::invalid_argument("ptr_lower_bound: t must be > 0");
  if (!(rho > 0.0)) throw std::invalid_argument("ptr_lower_bound: rho must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ptr_lower_bound: delta must be in (0, 1)");
  }
  if (budget != nullptr) budget->debit("ptr", rho / 2.0, delta);
  const double sigma = t / std::sqrt(rho);
  PtrResult result;
  result.q_hat =
      q_value + sigma * rng.normal() - sigma * normal_quantile(1.0 - delta);
  result.passed = result.q_hat > t;
  return result;
}

double zcdp_to_eps_delta(double rho, double delta) {
  if (rho < 0.0) throw std::invalid_argument("zcdp_to_eps_delta: rho < 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("zcdp_to_eps_delta: delta must be in (0, 1)");
  }
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

std::vector<bool> svt_run(const std::function<double(int)>& query, int max_len,
                          double threshold, double sigma1, double sigma2,
                          int cutoff, Rng& rng) {
  if (cutoff < 1) throw std::invalid_argument("svt_run: cutoff must be >= 1");
  if (max_len < 0) throw std::invalid_argument("svt_run: max_len must be >= 0");
  const double noisy_threshold = threshold + sigma1 * rng.normal();
  std::vector<bool> answers;
  int hits = 0;
  for (int i = 0; i < max_len; ++i) {
    const double noisy_query = query(i) + sigma2 * rng.normal();
    const bool top = noisy_query >= noisy_threshold;
    answers.push_back(top);
    if (top && ++hits >= cutoff) break;
  }
  return answers;
}

double svt_epsilon_bound(double query_sensitivity, double sigma1,
                         double sigma2, double c, double p, double delta) {
  if (!(query_sensitivity > 0.0) || !(sigma1 > 0.0) || !(sigma2 > 0.0) ||
      !(c > 0.0) || !(p > 0.0)) {
    throw std::invalid_argument("svt_epsilon_bound: arguments must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("svt_epsilon_bound: delta must be in (0, 1)");
  }
  const double d2 = query_sensitivity * query_sensitivity;
  const double base = d2 / (2.0 * sigma1 * sigma1) + 2.0 * c * d2 / (sigma2 * sigma2);
  const double log_choose = log_binomial(p, c);
  return base +
         std::sqrt(2.0 * base *
                   (std::log(1.0 / delta) + std::log(c) + log_choose));
}

double gumbel_quantile(double alpha, double scale) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("gumbel_quantile: alpha must be in (0, 1)");
  }
  if (!(scale > 0.0)) {
    throw std::invalid_argument("gumbel_quantile: scale must be > 0");
  }
  return -scale * std::log(-std::log(1.0 - alpha));
}

}  // namespace privdep
