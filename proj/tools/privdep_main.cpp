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

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "privdep/csv.hpp"
#include "privdep/output.hpp"
#include "privdep/simulate.hpp"
#include "privdep/stats.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;
constexpr int kExitData = 4;

struct CommonOptions {
  std::string input;
  std::string kernel = "kendall";
  int band = 0;
  double rho = 1.0;
  double dp_delta = 0.0;  // 0: default 1/n
  std::optional<std::uint64_t> seed;
  std::string out;
  double jitter_sd = 0.0;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed.has_value()) return *seed;
  // Non-reproducible mode: draw a seed once per process.
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

privdep::KernelSpec make_kernel(const CommonOptions& options, int d) {
  if (options.kernel != "kendall") {
    throw CLI::ValidationError("--kernel", "unknown kernel " + options.kernel);
  }
  return privdep::kendall_kernel(d, options.band);
}

privdep::DataMatrix load_data(const CommonOptions& options, privdep::Rng& rng) {
  privdep::DataMatrix data = privdep::read_csv(options.input);
  if (options.jitter_sd > 0.0) {
    privdep::Rng jitter_rng = rng.substream(0xD1CE);
    data = privdep::tie_jitter(data, options.jitter_sd, jitter_rng);
  }
  return data;
}

void emit(const nlohmann::json& document, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << document.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw privdep::DataError("cannot write " + out_path);
  out << document.dump(2) << "\n";
}

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int i = 99; i >= 1; --i) grid.push_back(i / 100.0);
  return grid;
}

void add_common(CLI::App* cmd, CommonOptions* options, bool with_data) {
  if (with_data) {
    cmd->add_option("data", options->input, "input CSV matrix")->required();
    cmd->add_option("--kernel", options->kernel, "dependence kernel")
        ->check(CLI::IsMember({"kendall"}))
        ->capture_default_str();
    cmd->add_option("--band", options->band,
                    "retain only column pairs with |i-j| >= band");
    cmd->add_option("--jitter", options->jitter_sd,
                    "sd of tie-breaking noise added to the data (0 = off)");
  }
  cmd->add_option("--rho", options->rho, "zCDP budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--dp-delta", options->dp_delta,
                  "approximation slack delta (default 1/n)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", options->seed, "seed for reproducible runs");
  cmd->add_option("--out", options->out, "output path (default stdout)");
}

double resolved_dp_delta(const CommonOptions& options, int n) {
  if (options.dp_delta > 0.0) return options.dp_delta;
  return 1.0 / n;
}

std::string summary_line(const privdep::TestOutcome& outcome) {
  std::string line = outcome.reject ? "reject H0" : "fail to reject H0";
  line += " at Delta=" + std::to_string(outcome.delta);
  line += " (branch " + privdep::branch_name(outcome.branch);
  line += ", normDP " + std::to_string(outcome.released_norm_dp) + ")";
  return line;
}

int run_test(const CommonOptions& common, std::vector<double> deltas,
             double alpha, int B, double gamma, double gap_fraction,
             double nu_linear, const std::string& branch,
             bool literal_gumbel_scale) {
  privdep::Rng rng(resolve_seed(common.seed));
  privdep::Rng data_rng = rng.substream(0);
  privdep::Rng run_rng = rng.substream(1);
  const privdep::DataMatrix data = load_data(common, data_rng);
  const privdep::KernelSpec kernel = make_kernel(common, data.d());
  const double dp_delta = resolved_dp_delta(common, data.n());
  privdep::PrivacyBudget budget(common.rho, dp_delta);

  privdep::HdTestOptions options;
  options.alpha = alpha;
  options.B = B;
  options.gamma = gamma;
  options.gap_budget_fraction = gap_fraction;
  options.literal_gumbel_scale = literal_gumbel_scale;
  if (nu_linear != 0.0) {
    options.regularizer = privdep::linear_regularizer(nu_linear, data.n());
  }

  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

  nlohmann::json document;
  privdep::TestOutcome outcome;
  std::string scan_summary;
  if (branch == "auto") {
    if (deltas.size() > 1) {
      const privdep::ScanResult scan =
          privdep::scan_delta(data, kernel, deltas, common.rho, dp_delta,
                              options, run_rng, budget);
      document = privdep::scan_json(scan, budget);
      outcome = scan.base;
      if (scan.none_rejected) {
        scan_summary = "scan: no rejection at any grid level";
      } else if (scan.all_rejected) {
        scan_summary = "scan: rejected at every grid level (deltaHat = grid "
                       "minimum " +
                       std::to_string(scan.delta_hat) + ")";
      } else {
        scan_summary = "scan: smallest non-rejected Delta = " +
                       std::to_string(scan.delta_hat);
      }
    } else {
      outcome = privdep::p_hd_u_test(data, kernel, deltas.front(), common.rho,
                                     dp_delta, options, run_rng, budget);
      document = privdep::outcome_json(outcome, budget);
    }
  } else {
    if (deltas.size() != 1) {
      throw CLI::ValidationError("--delta",
                                 "forced branches take a single threshold");
    }
    const double Delta = deltas.front();
    if (branch == "gumbel") {
      const privdep::UStatResult result =
          privdep::compute_ustat(data, kernel, false);
      privdep::GumbelOptions gumbel_options;
      gumbel_options.gamma = gamma;
      gumbel_options.literal_scale = literal_gumbel_scale;
      outcome = privdep::p_gumbel_test(result.u, kernel.order, kernel.bound,
                                       result.n, Delta, alpha, common.rho,
                                       gumbel_options, run_rng, &budget);
    } else if (branch == "hoeffding") {
      const privdep::UStatResult result =
          privdep::compute_ustat(data, kernel, false);
      outcome = privdep::hoeffding_test(
          result.u.cwiseAbs().maxCoeff(), result.n, kernel.output_dim,
          kernel.order, kernel.bound, Delta, alpha, /*private_release=*/true,
          common.rho, run_rng, &budget);
    } else if (branch == "finite") {
      outcome = privdep::finite_dim_test(data, kernel, Delta, alpha,
                                         common.rho, B, run_rng, budget);
    } else {
      throw CLI::ValidationError("--branch", "unknown branch " + branch);
    }
    document = privdep::outcome_json(outcome, budget);
  }
  emit(document, common.out);
  std::cerr << summary_line(outcome) << "\n";
  if (!scan_summary.empty()) std::cerr << scan_summary << "\n";
  return 0;
}

int run_extremal(const CommonOptions& common, double clip_delta,
                 double nu_linear) {
  privdep::Rng rng(resolve_seed(common.seed));
  privdep::Rng data_rng = rng.substream(0);
  privdep::Rng run_rng = rng.substream(1);
  const privdep::DataMatrix data = load_data(common, data_rng);
  const privdep::KernelSpec kernel = make_kernel(common, data.d());
  const double dp_delta = resolved_dp_delta(common, data.n());
  privdep::PrivacyBudget budget(common.rho, dp_delta);
  const privdep::UStatResult result =
      privdep::compute_ustat(data, kernel, false);
  std::function<double(int)> regularizer;
  if (nu_linear != 0.0) {
    regularizer = privdep::linear_regularizer(nu_linear, data.n());
  }
  privdep::ExtremalEstimate estimate;
  if (clip_delta > 0.0) {
    estimate = privdep::relevant_set(result.u, clip_delta, kernel, data.n(),
                                     common.rho, dp_delta, run_rng, &budget,
                                     regularizer);
  } else {
    estimate = privdep::p_rel(result.u, kernel, data.n(), common.rho, dp_delta,
                              run_rng, &budget, regularizer);
  }
  emit(privdep::extremal_json(estimate), common.out);
  return 0;
}

int run_simulate(const CommonOptions& common, const std::string& model_name,
                 int n, int d, std::vector<double> rho_list,
                 std::vector<double> delta_grid, int reps, int B, double alpha,
                 double gamma, const std::vector<std::string>& methods) {
  privdep::ExperimentConfig config;
  if (d <= 0) d = static_cast<int>(std::ceil(std::sqrt(2.0 * n)));
  config.model = privdep::build_tau(model_name, d);
  config.n = n;
  config.rho_list = std::move(rho_list);
  if (delta_grid.empty()) {
    delta_grid = {0.65, 0.6, 0.55, 0.5, 0.45, 0.4, 0.35};
  }
  std::sort(delta_grid.begin(), delta_grid.end(), std::greater<>());
  delta_grid.erase(std::unique(delta_grid.begin(), delta_grid.end()),
                   delta_grid.end());
  config.delta_grid = std::move(delta_grid);
  config.reps = reps;
  config.B = B;
  config.alpha = alpha;
  config.gamma = gamma;
  config.dp_delta = common.dp_delta;
  config.seed = resolve_seed(common.seed);
  config.methods = methods;
  const std::vector<privdep::PowerRow> rows =
      privdep::run_power_experiment(config);
  if (common.out.empty()) {
    privdep::write_power_csv(std::cout, rows);
  } else {
    std::ofstream out(common.out);
    if (!out) throw privdep::DataError("cannot write " + common.out);
    privdep::write_power_csv(out, rows);
  }
  return 0;
}

int run_svt_cost(int n, double p, double sigma, double sigma1, double sigma2,
                 double c, int order, double dp_delta, const std::string& out) {
  if (sigma > 0.0) sigma1 = sigma2 = sigma;
  if (!(sigma1 > 0.0 && sigma2 > 0.0)) {
    throw CLI::ValidationError("--sigma", "noise scales must be positive");
  }
  if (c <= 0.0) c = std::ceil(std::log(p));
  if (dp_delta <= 0.0) dp_delta = 1.0 / n;
  const double sensitivity = 4.0 * order / static_cast<double>(n);
  const double epsilon =
      privdep::svt_epsilon_bound(sensitivity, sigma1, sigma2, c, p, dp_delta);
  nlohmann::json document{{"epsilon", epsilon},
                          {"delta", dp_delta},
                          {"c", c},
                          {"p", p},
                          {"querySensitivity", sensitivity},
                          {"sigma1", sigma1},
                          {"sigma2", sigma2}};
  if (!out.empty()) {
    std::ofstream file(out);
    if (!file) throw privdep::DataError("cannot write " + out);
    file << document.dump(2) << "\n";
  }
  std::cout << "epsilon(delta) <= " << epsilon << " at delta = " << dp_delta
            << " (c = " << c << ", p = " << p << ")\n";
  return 0;
}

int run_verify(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw privdep::DataError("cannot open " + path);
  nlohmann::json document;
  in >> document;
  const privdep::VerifyReport report = privdep::verify_result(document);
  std::cout << (report.consistent ? "consistent" : "INCONSISTENT")
            << ": recorded decision "
            << (report.recorded_decision ? "reject" : "fail-to-reject")
            << ", recomputed "
            << (report.recomputed_decision ? "reject" : "fail-to-reject")
            << " (branch " << report.branch << ")\n";
  return report.consistent ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privdep: differentially private tests for relevant "
               "dependencies in high-dimensional data"};
  app.require_subcommand(0, 1);
  std::string verify_flag_path;
  app.add_option("--verify", verify_flag_path,
                 "recompute a recorded decision from its releases");

  // test
  CommonOptions test_common;
  std::vector<double> deltas{0.5};
  double alpha = 0.05;
  int B = 200;
  double gamma = 0.0;
  double gap_fraction = 1.0 / 3.0;
  double nu_linear = 0.0;
  bool literal_gumbel = false;
  std::string branch = "auto";
  CLI::App* test_cmd =
      app.add_subcommand("test", "test H0: all dependencies at most Delta");
  add_common(test_cmd, &test_common, true);
  test_cmd->add_option("--delta", deltas, "threshold(s); several form a grid")
      ->required()
      ->delimiter(',');
  test_cmd->add_option("--alpha", alpha, "nominal level")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  test_cmd->add_option("--B", B, "bootstrap replicates")->capture_default_str();
  test_cmd->add_option("--gamma", gamma, "Gumbel margin parameter");
  test_cmd->add_option("--gap-budget-fraction", gap_fraction,
                       "rho share of the extremal-set step")
      ->check(CLI::Range(1e-9, 1.0));
  test_cmd->add_option("--nu-linear", nu_linear,
                       "linear gap regularizer coefficient");
  test_cmd->add_option("--branch", branch, "force a branch")
      ->check(CLI::IsMember({"auto", "gumbel", "hoeffding", "finite"}))
      ->capture_default_str();
  test_cmd->add_flag("--gumbel-literal-scale", literal_gumbel,
                     "use the unsquared bound in the Gumbel scale");

  // extremal
  CommonOptions extremal_common;
  double clip_delta = 0.0;
  double extremal_nu = 0.0;
  CLI::App* extremal_cmd = app.add_subcommand(
      "extremal", "privately estimate the extremal coordinate set");
  add_common(extremal_cmd, &extremal_common, true);
  extremal_cmd->add_option(
      "--clip-delta", clip_delta,
      "clip gap queries at this threshold (recovers relevant coordinates)");
  extremal_cmd->add_option("--nu-linear", extremal_nu,
                           "linear gap regularizer coefficient");

  // scan
  CommonOptions scan_common;
  std::vector<double> scan_grid;
  double scan_alpha = 0.05;
  int scan_B = 200;
  double scan_gamma = 0.0;
  double scan_fraction = 1.0 / 3.0;
  double scan_nu = 0.0;
  bool scan_literal = false;
  CLI::App* scan_cmd = app.add_subcommand(
      "scan", "smallest non-rejected Delta over a grid (one release)");
  add_common(scan_cmd, &scan_common, true);
  scan_cmd->add_option("--delta-grid", scan_grid,
                       "descending thresholds (default 0.99..0.01)")
      ->delimiter(',');
  scan_cmd->add_option("--alpha", scan_alpha, "nominal level")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  scan_cmd->add_option("--B", scan_B, "bootstrap replicates")
      ->capture_default_str();
  scan_cmd->add_option("--gamma", scan_gamma, "Gumbel margin parameter");
  scan_cmd->add_option("--gap-budget-fraction", scan_fraction,
                       "rho share of the extremal-set step")
      ->check(CLI::Range(1e-9, 1.0));
  scan_cmd->add_option("--nu-linear", scan_nu,
                       "linear gap regularizer coefficient");
  scan_cmd->add_flag("--gumbel-literal-scale", scan_literal,
                     "use the unsquared bound in the Gumbel scale");

  // simulate
  CommonOptions sim_common;
  std::string model = "F2";
  int sim_n = 250;
  int sim_d = 0;
  std::vector<double> sim_rho{1.0};
  std::vector<double> sim_grid;
  int reps = 200;
  int sim_B = 200;
  double sim_alpha = 0.05;
  double sim_gamma = 0.0;
  std::vector<std::string> methods{"phdu"};
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Monte-Carlo power experiment");
  sim_cmd->add_option("--model", model, "tau design")
      ->check(CLI::IsMember({"F1", "F2", "U1", "U2"}))
      ->capture_default_str();
  sim_cmd->add_option("--n", sim_n, "sample size")->capture_default_str();
  sim_cmd->add_option("--d", sim_d, "dimension (default ceil(sqrt(2n)))");
  sim_cmd->add_option("--rho", sim_rho, "zCDP budgets")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--delta-grid", sim_grid, "thresholds, descending")
      ->delimiter(',');
  sim_cmd->add_option("--reps", reps, "simulation runs per cell")
      ->capture_default_str();
  sim_cmd->add_option("--B", sim_B, "bootstrap replicates")
      ->capture_default_str();
  sim_cmd->add_option("--alpha", sim_alpha, "nominal level")
      ->capture_default_str();
  sim_cmd->add_option("--gamma", sim_gamma, "Gumbel margin parameter");
  sim_cmd->add_option("--methods", methods,
                      "any of phdu, hoeffding, gumbel")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--dp-delta", sim_common.dp_delta,
                      "approximation slack (default 1/n)");
  sim_cmd->add_option("--seed", sim_common.seed, "seed");
  sim_cmd->add_option("--out", sim_common.out, "CSV output path");

  // svt-cost
  int svt_n = 250;
  double svt_p = 0.0;
  double svt_sigma = 0.0;
  double svt_sigma1 = 0.0;
  double svt_sigma2 = 0.0;
  double svt_c = 0.0;
  int svt_r = 2;
  double svt_delta = 0.0;
  std::string svt_out;
  CLI::App* svt_cmd = app.add_subcommand(
      "svt-cost", "privacy cost bound of the sparse-vector baseline");
  svt_cmd->add_option("--n", svt_n, "sample size")->required();
  svt_cmd->add_option("--p", svt_p, "number of queries")->required();
  svt_cmd->add_option("--sigma", svt_sigma, "sets both noise scales");
  svt_cmd->add_option("--sigma1", svt_sigma1, "threshold noise scale");
  svt_cmd->add_option("--sigma2", svt_sigma2, "query noise scale");
  svt_cmd->add_option("--c", svt_c, "cutoff (default ceil(log p))");
  svt_cmd->add_option("--r", svt_r, "kernel order")->capture_default_str();
  svt_cmd->add_option("--dp-delta", svt_delta, "delta (default 1/n)");
  svt_cmd->add_option("--out", svt_out, "JSON output path");

  // verify
  std::string verify_path;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "recompute a recorded decision from its releases");
  verify_cmd->add_option("result", verify_path, "result JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!verify_flag_path.empty()) {
      return run_verify(verify_flag_path);
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help() << "\n";
      return kExitUsage;
    }
    if (test_cmd->parsed()) {
      return run_test(test_common, deltas, alpha, B, gamma, gap_fraction,
                      nu_linear, branch, literal_gumbel);
    }
    if (extremal_cmd->parsed()) {
      return run_extremal(extremal_common, clip_delta, extremal_nu);
    }
    if (scan_cmd->parsed()) {
      if (scan_grid.empty()) scan_grid = default_grid();
      return run_test(scan_common, scan_grid, scan_alpha, scan_B, scan_gamma,
                      scan_fraction, scan_nu, "auto", scan_literal);
    }
    if (sim_cmd->parsed()) {
      return run_simulate(sim_common, model, sim_n, sim_d, sim_rho, sim_grid,
                          reps, sim_B, sim_alpha, sim_gamma, methods);
    }
    if (svt_cmd->parsed()) {
      return run_svt_cost(svt_n, svt_p, svt_sigma, svt_sigma1, svt_sigma2,
                          svt_c, svt_r, svt_delta, svt_out);
    }
    if (verify_cmd->parsed()) {
      return run_verify(verify_path);
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const privdep::BudgetExhaustedError& e) {
    std::cerr << "budget violation: " << e.what() << "\n";
    return kExitBudget;
  } catch (const privdep::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
