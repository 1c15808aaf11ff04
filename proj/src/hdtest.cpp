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

#include "privdep/hdtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace privdep {

namespace {

constexpr std::uint64_t kStreamCov = 0;
constexpr std::uint64_t kStreamQuantile = 1;
constexpr std::uint64_t kStreamNorm = 2;
constexpr std::uint64_t kStreamPRel = 3;
constexpr std::uint64_t kStreamFallback = 4;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }
}

int quantile_index(int B, double alpha) {
  require_alpha(alpha);
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  const int index = static_cast<int>(std::floor((1.0 - alpha) * B));
  if (index < 1 || static_cast<double>(B) * alpha < 1.0) {
    throw std::invalid_argument("B too small for the requested alpha");
  }
  return index;
}

// Square root factor A with A A^T equal to the PSD projection of m.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots[i] = roots[i] > 0.0 ? std::sqrt(roots[i]) : 0.0;
  }
  return solver.eigenvectors() * roots.asDiagonal();
}

double sorted_quantile(std::vector<double>& draws, int index) {
  std::sort(draws.begin(), draws.end());
  return draws[static_cast<std::size_t>(index - 1)];
}

}  // namespace

std::string branch_name(TestBranch branch) {
  switch (branch) {
    case TestBranch::bootstrap: return "bootstrap";
    case TestBranch::gumbel: return "gumbel";
    case TestBranch::hoeffding: return "hoeffding";
    case TestBranch::finite_dim: return "finiteDim";
  }
  return "unknown";
}

TestBranch branch_from_name(const std::string& name) {
  if (name == "bootstrap") return TestBranch::bootstrap;
  if (name == "gumbel") return TestBranch::gumbel;
  if (name == "hoeffding") return TestBranch::hoeffding;
  if (name == "finiteDim") return TestBranch::finite_dim;
  throw std::invalid_argument("unknown branch: " + name);
}

bool outcome_decision(TestBranch branch, double released_norm_dp, double delta,
                      double quantile) {
  const double margin = released_norm_dp - delta;
  switch (branch) {
    case TestBranch::bootstrap:
    case TestBranch::gumbel:
      return margin >= quantile;
    case TestBranch::hoeffding:
    case TestBranch::finite_dim:
      return margin > quantile;
  }
  return false;
}

Eigen::MatrixXd gausscov(const Eigen::MatrixXd& zeta, double rho,
                         double sensitivity, Rng& rng, PrivacyBudget* budget) {
  if (zeta.rows() != zeta.cols()) {
    throw std::invalid_argument("gausscov: matrix must be square");
  }
  const double sigma = gaussian_sigma(sensitivity, rho);
  if (budget != nullptr) budget->debit("gausscov", rho);
  Eigen::MatrixXd out = zeta;
  for (Eigen::Index i = 0; i < zeta.rows(); ++i) {
    for (Eigen::Index j = i; j < zeta.cols(); ++j) {
      const double noise = sigma * rng.normal();
      out(i, j) += noise;
      if (j != i) out(j, i) += noise;
    }
  }
  return out;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& zeta) {
  if (zeta.rows() != zeta.cols()) {
    throw std::invalid_argument("psd_project: matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(zeta);
  Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd projected = solver.eigenvectors() * clipped.asDiagonal() *
                              solver.eigenvectors().transpose();
  // Symmetrize away rounding asymmetry from the reconstruction.
  return 0.5 * (projected + projected.transpose());
}

Eigen::MatrixXd sign_matrix(const Eigen::VectorXd& u,
                            std::span<const int> indices) {
  const int k = static_cast<int>(indices.size());
  Eigen::MatrixXd s(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double prod = u[indices[static_cast<std::size_t>(a)]] *
                          u[indices[static_cast<std::size_t>(b)]];
      s(a, b) = prod > 0.0 ? 1.0 : (prod < 0.0 ? -1.0 : 1.0);
    }
  }
  return s;
}

double hqu_quantile(const Eigen::MatrixXd& zeta_hat,
                    const Eigen::MatrixXd& signs, int n, int B,
                    double norm_sensitivity, double cov_sensitivity,
                    double rho, double alpha, Rng& rng, PrivacyBudget* budget,
                    Eigen::MatrixXd* released_cov) {
  if (zeta_hat.rows() != signs.rows() || zeta_hat.cols() != signs.cols()) {
    throw std::invalid_argument("hqu_quantile: sign matrix shape mismatch");
  }
  const int index = quantile_index(B, alpha);
  const Eigen::MatrixXd adjusted = signs.cwiseProduct(zeta_hat);
  Rng cov_rng = rng.substream(kStreamCov);
  const Eigen::MatrixXd cov_dp =
      gausscov(adjusted, rho, cov_sensitivity, cov_rng, budget);
  if (released_cov != nullptr) *released_cov = cov_dp;
  const Eigen::MatrixXd factor =
      psd_sqrt(psd_project(cov_dp)) / std::sqrt(static_cast<double>(n));
  const double sigma = gaussian_sigma(norm_sensitivity, rho);
  std::vector<double> draws(static_cast<std::size_t>(B));
  const int k = static_cast<int>(zeta_hat.rows());
  for (int b = 0; b < B; ++b) {
    Rng sub = rng.substream(kStreamQuantile + 1 + static_cast<std::uint64_t>(b));
    const Eigen::VectorXd sample = factor * sub.normal_vector(k);
    draws[static_cast<std::size_t>(b)] =
        sample.cwiseAbs().maxCoeff() + sigma * sub.normal();
  }
  return sorted_quantile(draws, index);
}

double qu_quantile(const Eigen::MatrixXd& zeta_dp, int n, int B,
                   double norm_sensitivity, double rho, double alpha,
                   Rng& rng) {
  const int index = quantile_index(B, alpha);
  const Eigen::MatrixXd factor =
      psd_sqrt(psd_project(zeta_dp)) / std::sqrt(static_cast<double>(n));
  const double sigma = gaussian_sigma(norm_sensitivity, rho);
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> draws(static_cast<std::size_t>(B));
  const int k = static_cast<int>(zeta_dp.rows());
  for (int b = 0; b < B; ++b) {
    Rng sub = rng.substream(static_cast<std::uint64_t>(b));
    const Eigen::VectorXd sample = factor * sub.normal_vector(k);
    draws[static_cast<std::size_t>(b)] =
        root_n * (sample.cwiseAbs().maxCoeff() + sigma * sub.normal());
  }
  return sorted_quantile(draws, index);
}

double gumbel_critical_value(int p, double Delta, double l_inf, double alpha,
                             const GumbelOptions& options) {
  if (p < 2) throw std::invalid_argument("gumbel_critical_value: need p >= 2");
  require_alpha(alpha);
  const double centered = Delta - options.gamma;
  const double scale_sq = options.literal_scale
                              ? l_inf - centered * centered
                              : l_inf * l_inf - centered * centered;
  if (!(scale_sq > 0.0)) {
    throw std::invalid_argument(
        "gumbel_critical_value: degenerate scale, need L_inf^2 > (Delta-gamma)^2");
  }
  const double scale = std::sqrt(scale_sq);
  const double log_p = std::log(static_cast<double>(p));
  const double a_p = std::sqrt(2.0 * log_p);
  const double correction =
      (std::log(log_p) + std::log(4.0 * std::numbers::pi)) / (2.0 * a_p);
  return gumbel_quantile(alpha, scale) / a_p + a_p - correction;
}

TestOutcome p_gumbel_test(const Eigen::VectorXd& u, int order, double l_inf,
                          int n, double Delta, double alpha, double rho,
                          const GumbelOptions& options, Rng& rng,
                          PrivacyBudget* budget) {
  const int p = static_cast<int>(u.size());
  if (p < 2) throw std::invalid_argument("p_gumbel_test: need p >= 2");
  require_alpha(alpha);
  const double centered = Delta - options.gamma;
  const double scale_sq = options.literal_scale
                              ? l_inf - centered * centered
                              : l_inf * l_inf - centered * centered;
  // A threshold at or beyond the kernel bound cannot be exceeded by the
  // statistic; the test degenerates to never rejecting.
  double quantile = std::numeric_limits<double>::infinity();
  if (scale_sq > 0.0) {
    quantile = gumbel_critical_value(p, Delta, l_inf, alpha, options) /
               std::sqrt(static_cast<double>(n));
  }
  const double sensitivity = 2.0 * order * l_inf / n;
  Rng norm_rng = rng.substream(kStreamNorm);
  const double released =
      gaussian_mechanism(u.cwiseAbs().maxCoeff(), sensitivity, rho, norm_rng,
                         budget);
  TestOutcome outcome;
  outcome.branch = TestBranch::gumbel;
  outcome.delta = Delta;
  outcome.alpha = alpha;
  outcome.n = n;
  outcome.p = p;
  outcome.released_norm_dp = released;
  outcome.quantile = quantile;
  outcome.reject = outcome_decision(TestBranch::gumbel, released, Delta,
                                    outcome.quantile);
  return outcome;
}

double hoeffding_threshold(int n, int p, int order, double h_inf,
                           double alpha) {
  require_alpha(alpha);
  return std::sqrt(2.0 * std::log(2.0 * p / alpha) * h_inf * order / n);
}

TestOutcome hoeffding_test(double norm_inf, int n, int p, int order,
                           double h_inf, double Delta, double alpha,
                           bool private_release, double rho, Rng& rng,
                           PrivacyBudget* budget) {
  TestOutcome outcome;
  outcome.branch = TestBranch::hoeffding;
  outcome.delta = Delta;
  outcome.alpha = alpha;
  outcome.n = n;
  outcome.p = p;
  outcome.quantile = hoeffding_threshold(n, p, order, h_inf, alpha);
  if (private_release) {
    Rng norm_rng = rng.substream(kStreamNorm);
    outcome.released_norm_dp = gaussian_mechanism(
        norm_inf, 2.0 * order * h_inf / n, rho, norm_rng, budget);
  } else {
    outcome.released_norm_dp = norm_inf;
  }
  outcome.reject = outcome_decision(TestBranch::hoeffding,
                                    outcome.released_norm_dp, Delta,
                                    outcome.quantile);
  return outcome;
}

TestOutcome finite_dim_test(const DataMatrix& data, const KernelSpec& kernel,
                            double Delta, double alpha, double rho, int B,
                            Rng& rng, PrivacyBudget& budget) {
  if (!(rho > 0.0)) throw std::invalid_argument("finite_dim_test: rho must be > 0");
  const double rho_before = budget.rho_spent();
  const double delta_before = budget.delta_spent();
  const UStatResult result = compute_ustat(data, kernel, true);
  const JackknifeCov jack = jackknife_cov(result, {});
  const int p = kernel.output_dim;
  const double cov_sensitivity =
      jackknife_sensitivity(kernel, result.n, p);
  Rng cov_rng = rng.substream(kStreamCov);
  const Eigen::MatrixXd cov_dp =
      gausscov(jack.zeta, rho / 2.0, cov_sensitivity, cov_rng, &budget);
  const double norm_sensitivity = ustat_sensitivity(kernel, result.n);
  Rng quantile_rng = rng.substream(kStreamQuantile);
  const double q_star = qu_quantile(cov_dp, result.n, B, norm_sensitivity,
                                    rho / 2.0, alpha, quantile_rng);
  Rng norm_rng = rng.substream(kStreamNorm);
  const double released = gaussian_mechanism(
      result.u.cwiseAbs().maxCoeff(), norm_sensitivity, rho / 2.0, norm_rng,
      &budget);

  TestOutcome outcome;
  outcome.branch = TestBranch::finite_dim;
  outcome.delta = Delta;
  outcome.alpha = alpha;
  outcome.n = result.n;
  outcome.p = p;
  outcome.released_norm_dp = released;
  outcome.quantile = q_star / std::sqrt(static_cast<double>(result.n));
  outcome.cov_dp = cov_dp;
  outcome.reject = outcome_decision(TestBranch::finite_dim, released, Delta,
                                    outcome.quantile);
  outcome.rho_spent = budget.rho_spent() - rho_before;
  outcome.delta_spent = budget.delta_spent() - delta_before;
  return outcome;
}

TestOutcome p_hd_u_test(const DataMatrix& data, const KernelSpec& kernel,
                        double Delta, double rho, double delta,
                        const HdTestOptions& options, Rng& rng,
                        PrivacyBudget& budget) {
  if (kernel.output_dim < 2) {
    throw std::invalid_argument("p_hd_u_test: need p >= 2");
  }
  if (!(rho > 0.0)) throw std::invalid_argument("p_hd_u_test: rho must be > 0");
  if (!(options.gap_budget_fraction > 0.0 &&
        options.gap_budget_fraction < 1.0)) {
    throw std::invalid_argument("p_hd_u_test: gap fraction must be in (0, 1)");
  }
  quantile_index(options.B, options.alpha);

  const double rho_before = budget.rho_spent();
  const double delta_before = budget.delta_spent();

  const UStatResult result = compute_ustat(data, kernel, false);
  const int n = result.n;
  const double rho_rel = options.gap_budget_fraction * rho;
  const double rho_rest = rho - rho_rel;

  Rng rel_rng = rng.substream(kStreamPRel);
  const ExtremalEstimate estimate =
      p_rel(result.u, kernel, n, rho_rel, delta, rel_rng, &budget,
            options.regularizer);

  TestOutcome outcome;
  if (estimate.bottom) {
    GumbelOptions gumbel_options;
    gumbel_options.gamma = options.gamma;
    gumbel_options.literal_scale = options.literal_gumbel_scale;
    Rng fallback_rng = rng.substream(kStreamFallback);
    outcome = p_gumbel_test(result.u, kernel.order, kernel.bound, n, Delta,
                            options.alpha, rho_rest, gumbel_options,
                            fallback_rng, &budget);
  } else {
    const double rho_cov = rho_rest / 2.0;
    const double rho_norm = rho_rest / 2.0;
    const JackknifeCov jack =
        jackknife_cov(data, kernel, result.u, estimate.indices);
    const Eigen::MatrixXd signs = sign_matrix(result.u, estimate.indices);
    const double cov_sensitivity = jackknife_sensitivity(
        kernel, n, static_cast<int>(estimate.indices.size()));
    const double norm_sensitivity = ustat_sensitivity(kernel, n);
    Eigen::MatrixXd released_cov;
    Rng quantile_rng = rng.substream(kStreamQuantile);
    const double q_star = hqu_quantile(
        jack.zeta, signs, n, options.B, norm_sensitivity, cov_sensitivity,
        rho_cov, options.alpha, quantile_rng, &budget, &released_cov);
    Rng norm_rng = rng.substream(kStreamNorm);
    const double released = gaussian_mechanism(
        result.u.cwiseAbs().maxCoeff(), norm_sensitivity, rho_norm, norm_rng,
        &budget);
    outcome.branch = TestBranch::bootstrap;
    outcome.released_norm_dp = released;
    outcome.quantile = q_star;
    outcome.cov_dp = std::move(released_cov);
    outcome.reject = outcome_decision(TestBranch::bootstrap, released, Delta,
                                      q_star);
  }
  outcome.delta = Delta;
  outcome.alpha = options.alpha;
  outcome.n = n;
  outcome.p = kernel.output_dim;
  outcome.extremal = estimate;
  outcome.rho_spent = budget.rho_spent() - rho_before;
  outcome.delta_spent = budget.delta_spent() - delta_before;
  return outcome;
}

namespace {

bool grid_decision(const TestOutcome& base, const KernelSpec& kernel,
                   const HdTestOptions& options, double Delta) {
  double quantile = base.quantile;
  if (base.branch == TestBranch::gumbel) {
    GumbelOptions gumbel_options;
    gumbel_options.gamma = options.gamma;
    gumbel_options.literal_scale = options.literal_gumbel_scale;
    // A grid value with degenerate Gumbel scale cannot be rejected.
    const double centered = Delta - gumbel_options.gamma;
    const double scale_sq = gumbel_options.literal_scale
                                ? kernel.bound - centered * centered
                                : kernel.bound * kernel.bound -
                                      centered * centered;
    if (!(scale_sq > 0.0)) return false;
    quantile =
        gumbel_critical_value(base.p, Delta, kernel.bound, base.alpha,
                              gumbel_options) /
        std::sqrt(static_cast<double>(base.n));
  }
  return outcome_decision(base.branch, base.released_norm_dp, Delta, quantile);
}

}  // namespace

ScanResult scan_delta(const DataMatrix& data, const KernelSpec& kernel,
                      std::span<const double> grid, double rho, double delta,
                      const HdTestOptions& options, Rng& rng,
                      PrivacyBudget& budget) {
  if (grid.empty()) throw std::invalid_argument("scan_delta: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] >= grid[i - 1]) {
      throw std::invalid_argument("scan_delta: grid must be descending");
    }
  }
  ScanResult scan;
  scan.grid.assign(grid.begin(), grid.end());
  scan.base =
      p_hd_u_test(data, kernel, grid.front(), rho, delta, options, rng, budget);
  scan.decisions.resize(grid.size());
  bool any_rejected = false;
  bool found = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool rejected = grid_decision(scan.base, kernel, options, grid[i]);
    scan.decisions[i] = rejected;
    any_rejected = any_rejected || rejected;
    if (!rejected) {
      // Descending grid: the last non-rejection seen is the smallest one.
      scan.delta_hat = grid[i];
      found = true;
    }
  }
  scan.none_rejected = !any_rejected;
  if (!found) {
    scan.all_rejected = true;
    scan.delta_hat = grid.back();
  }
  return scan;
}

}  // namespace privdep
