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
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privdep/rng.hpp"
#include "privdep/types.hpp"

namespace privdep {

// Approximate-zCDP budget with an append-only ledger. Composition is linear
// in both rho and delta; a debit that would overrun either total throws
// BudgetExhaustedError before anything is released. Debits are serialized,
// everything else is free to run in parallel.
class PrivacyBudget {
 public:
  struct Entry {
    std::string mechanism;
    double rho = 0.0;
    double delta = 0.0;
  };

  PrivacyBudget(double rho, double delta);

  void debit(std::string_view mechanism, double rho_cost,
             double delta_cost = 0.0);

  double rho() const { return rho_; }
  double delta() const { return delta_; }
  double rho_spent() const;
  double delta_spent() const;
  std::vector<Entry> entries() const;

 private:
  double rho_;
  double delta_;
  double rho_spent_ = 0.0;
  double delta_spent_ = 0.0;
  std::vector<Entry> ledger_;
  mutable std::mutex mu_;
};

// sigma = sensitivity / sqrt(2 rho) for the Gaussian mechanism.
double gaussian_sigma(double l2_sensitivity, double rho);

// A released value together with the noise scale that produced it.
struct NoisyRelease {
  Eigen::VectorXd value;   // one entry for scalar releases
  double sigma = 0.0;
  std::string mechanism;
};

NoisyRelease gaussian_release(const Eigen::VectorXd& value,
                              double l2_sensitivity, double rho, Rng& rng,
                              PrivacyBudget* budget);

// Gaussian mechanism: adds N(0, sigma^2) per coordinate with
// sigma = l2_sensitivity / sqrt(2 rho) and debits rho. Pass a null budget to
// skip the debit (noise applied to synthetic bootstrap draws is
// post-processing, not a release of sensitive data).
double gaussian_mechanism(double value, double l2_sensitivity, double rho,
                          Rng& rng, PrivacyBudget* budget);
Eigen::VectorXd gaussian_mechanism(const Eigen::VectorXd& value,
                                   double l2_sensitivity, double rho, Rng& rng,
                                   PrivacyBudget* budget);

// Regularized report-noisy-max: argmax_j { q[j] + nu(j) + Gumbel(2 Delta1 /
// epsilon) } with independent Gumbel draws; costs epsilon^2/8 zCDP.
// epsilon = +infinity is the zero-noise path returning the exact regularized
// argmax (ties broken by the lowest index). nu may be null (identically 0).
int rl_gap(std::span<const double> q, double epsilon, double l1_sensitivity,
           const std::function<double(int)>& regularizer, Rng& rng,
           PrivacyBudget* budget);

struct PtrResult {
  bool passed = false;
  double q_hat = 0.0;
};

// Propose-test-release lower bound: sigma = t / sqrt(rho),
// q_hat = q_value + N(0, sigma^2) - sigma * z_{1-delta}, passed iff
// q_hat > t. Costs rho/2 zCDP and delta approximation slack.
PtrResult ptr_lower_bound(double q_value, double t, double rho, double delta,
                          Rng& rng, PrivacyBudget* budget);

// Standard conversion: eps = rho + 2 sqrt(rho log(1/delta)).
double zcdp_to_eps_delta(double rho, double delta);

// Generalized sparse vector technique. One Gaussian noise draw (sd sigma1)
// perturbs the threshold, an independent draw (sd sigma2) perturbs each
// query; emits true when the noisy query clears the noisy threshold. Stops
// after `cutoff` positive answers or `max_len` queries.
std::vector<bool> svt_run(const std::function<double(int)>& query, int max_len,
                          double threshold, double sigma1, double sigma2,
                          int cutoff, Rng& rng);

// Upper bound on the (eps, delta) cost of the generalized SVT with query
// sensitivity `query_sensitivity`, noise scales sigma1/sigma2, cutoff c (may
// be non-integer; the binomial is continued via lgamma) over p queries.
double svt_epsilon_bound(double query_sensitivity, double sigma1,
                         double sigma2, double c, double p, double delta);

// (1-alpha)-quantile of Gumbel(0, scale): -scale * log(-log(1 - alpha)).
double gumbel_quantile(double alpha, double scale);

}  // namespace privdep
