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
#include <string>
#include <vector>

#include "privdep/extremal.hpp"
#include "privdep/privacy.hpp"
#include "privdep/ustat.hpp"

namespace privdep {

enum class TestBranch { bootstrap, gumbel, hoeffding, finite_dim };

std::string branch_name(TestBranch branch);
TestBranch branch_from_name(const std::string& name);

// Everything a test run releases. The decision rule is uniform:
// reject iff released_norm_dp - delta OP quantile, where OP is ">=" on the
// bootstrap and gumbel branches and ">" on the hoeffding and finite_dim
// branches. Re-deriving the decision from the released fields is pure
// post-processing.
struct TestOutcome {
  bool reject = false;
  double delta = 0.0;
  TestBranch branch = TestBranch::bootstrap;
  double released_norm_dp = 0.0;
  double quantile = 0.0;
  std::optional<ExtremalEstimate> extremal;
  std::optional<Eigen::MatrixXd> cov_dp;
  double rho_spent = 0.0;
  double delta_spent = 0.0;
  int n = 0;
  int p = 0;
  double alpha = 0.0;
};

bool outcome_decision(TestBranch branch, double released_norm_dp, double delta,
                      double quantile);

// Private covariance release: one symmetric Gaussian noise matrix (upper
// triangle sampled, mirrored) scaled by sensitivity / sqrt(2 rho); debits rho.
Eigen::MatrixXd gausscov(const Eigen::MatrixXd& zeta, double rho,
                         double sensitivity, Rng& rng, PrivacyBudget* budget);

// Nearest (Frobenius) positive-semidefinite matrix: eigenvalues clipped at 0.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& zeta);

// S_ij = sign(U_i U_j) over the selected coordinates, with sign(0) := +1.
Eigen::MatrixXd sign_matrix(const Eigen::VectorXd& u,
                            std::span<const int> indices);

// Bootstrap quantile for the selected-coordinate max statistic: privatizes
// S (.) zeta once via gausscov (debits rho), PSD-projects, draws B vectors
// from N(0, cov/n), adds non-debited noise matching the real norm release
// (scale norm_sensitivity / sqrt(2 rho)) to each max-norm, and returns the
// floor((1-alpha) B)-th ascending order statistic. If released_cov is
// non-null it receives the privatized (unprojected) covariance.
double hqu_quantile(const Eigen::MatrixXd& zeta_hat,
                    const Eigen::MatrixXd& signs, int n, int B,
                    double norm_sensitivity, double cov_sensitivity,
                    double rho, double alpha, Rng& rng, PrivacyBudget* budget,
                    Eigen::MatrixXd* released_cov = nullptr);

// Finite-dimensional variant on an already privatized covariance: draws from
// N(0, psd(zeta_dp)/n), T*_b = sqrt(n) (max-norm + matching release noise).
double qu_quantile(const Eigen::MatrixXd& zeta_dp, int n, int B,
                   double norm_sensitivity, double rho, double alpha,
                   Rng& rng);

struct GumbelOptions {
  double gamma = 0.0;
  // Algorithm text reads Gumbel(0, sqrt(L - (Delta-gamma)^2)); the variance
  // bound behind it gives L^2 - (Delta-gamma)^2. The squared form is the
  // default, the literal one stays selectable for comparison.
  bool literal_scale = false;
};

double gumbel_critical_value(int p, double Delta, double l_inf, double alpha,
                             const GumbelOptions& options);

// Extreme-value fallback: releases ||U||_inf (budget rho, sensitivity
// 2 r L_inf / n) and rejects iff the release clears Delta + Q / sqrt(n).
TestOutcome p_gumbel_test(const Eigen::VectorXd& u, int order, double l_inf,
                          int n, double Delta, double alpha, double rho,
                          const GumbelOptions& options, Rng& rng,
                          PrivacyBudget* budget);

// Concentration threshold sqrt(2 log(2p/alpha) h_inf r / n).
double hoeffding_threshold(int n, int p, int order, double h_inf,
                           double alpha);

// Concentration test on the exact or privatized max-norm.
TestOutcome hoeffding_test(double norm_inf, int n, int p, int order,
                           double h_inf, double Delta, double alpha,
                           bool private_release, double rho, Rng& rng,
                           PrivacyBudget* budget);

struct HdTestOptions {
  double alpha = 0.05;
  int B = 200;
  double gamma = 0.0;
  // Fraction of rho allocated to the extremal-set step; the remainder is
  // split evenly between the covariance and norm releases (the fallback
  // branch receives it whole).
  double gap_budget_fraction = 1.0 / 3.0;
  bool literal_gumbel_scale = false;
  std::function<double(int)> regularizer;
};

// Full-dimensional bootstrap test for small fixed p: privatizes the whole
// jackknife covariance (rho/2), releases ||U||_inf (rho/2) and rejects iff
// sqrt(n)(||U||_inf^DP - Delta) > qu_quantile.
TestOutcome finite_dim_test(const DataMatrix& data, const KernelSpec& kernel,
                            double Delta, double alpha, double rho, int B,
                            Rng& rng, PrivacyBudget& budget);

// The main private high-dimensional test: extremal-set estimation, then the
// selected-coordinate bootstrap, or the Gumbel fallback when no usable gap
// is found. Total cost rho zCDP and delta.
TestOutcome p_hd_u_test(const DataMatrix& data, const KernelSpec& kernel,
                        double Delta, double rho, double delta,
                        const HdTestOptions& options, Rng& rng,
                        PrivacyBudget& budget);

struct ScanResult {
  double delta_hat = 0.0;
  bool all_rejected = false;
  bool none_rejected = false;
  std::vector<double> grid;
  std::vector<bool> decisions;   // aligned with grid
  TestOutcome base;              // releases; decision taken at grid.front()
};

// Tests the whole descending grid from one set of releases; every per-Delta
// decision is post-processing. delta_hat is the smallest grid value that
// fails to reject; if every grid value rejects it is the grid minimum with
// all_rejected set.
ScanResult scan_delta(const DataMatrix& data, const KernelSpec& kernel,
                      std::span<const double> grid, double rho, double delta,
                      const HdTestOptions& options, Rng& rng,
                      PrivacyBudget& budget);

}  // namespace privdep
