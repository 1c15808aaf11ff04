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

#include "privdep/simulate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace privdep {

namespace {

int leading_block(int d) {
  return static_cast<int>(std::floor(d / std::numbers::sqrt2));
}

void require_block(const std::string& name, int d, int minimum) {
  if (d < minimum) {
    throw std::invalid_argument("build_tau: design " + name + " needs d >= " +
                                std::to_string(minimum));
  }
}

}  // namespace

TauModel build_tau(const std::string& name, int d) {
  TauModel model;
  model.name = name;
  model.d = d;
  model.tau = Eigen::MatrixXd::Identity(d, d);
  if (name == "F1") {
    require_block(name, d, 3);  // floor(d/sqrt(2)) >= 2
    const int m = leading_block(d);
    if (m < 2) throw std::invalid_argument("build_tau: F1 block too small");
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        model.tau(i, j) = model.tau(j, i) = 0.5;
      }
    }
  } else if (name == "F2") {
    require_block(name, d, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        model.tau(i, j) = model.tau(j, i) = 0.5;
      }
    }
  } else if (name == "U1") {
    require_block(name, d, 3);
    const int m = leading_block(d);
    if (m < 2) throw std::invalid_argument("build_tau: U1 block too small");
    Eigen::VectorXd b(m);
    for (int j = 0; j < m; ++j) {
      b[j] = 0.01 + j * (0.99 - 0.01) / (m - 1.0);
    }
    // Two largest entries give the largest off-diagonal product.
    const double max_product = b[m - 1] * b[m - 2];
    const Eigen::VectorXd a = std::sqrt(0.5 / max_product) * b;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        model.tau(i, j) = model.tau(j, i) = a[i] * a[j];
      }
    }
  } else if (name == "U2") {
    require_block(name, d, 3);
    const int m = leading_block(d);
    if (m < 2) throw std::invalid_argument("build_tau: U2 block too small");
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        model.tau(i, j) = model.tau(j, i) = 0.5;
      }
    }
    for (int i = m; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        model.tau(i, j) = model.tau(j, i) = 0.25;
      }
    }
  } else {
    throw std::invalid_argument("build_tau: unknown design " + name);
  }
  return model;
}

TauModel custom_tau(Eigen::MatrixXd tau) {
  if (tau.rows() != tau.cols()) {
    throw std::invalid_argument("custom_tau: matrix must be square");
  }
  TauModel model;
  model.name = "custom";
  model.d = static_cast<int>(tau.rows());
  for (int i = 0; i < model.d; ++i) {
    if (tau(i, i) != 1.0) {
      throw std::invalid_argument("custom_tau: diagonal must be 1");
    }
    for (int j = 0; j < model.d; ++j) {
      if (tau(i, j) != tau(j, i) || std::abs(tau(i, j)) > 1.0) {
        throw std::invalid_argument("custom_tau: need symmetric entries in [-1, 1]");
      }
    }
  }
  model.tau = std::move(tau);
  return model;
}

Eigen::MatrixXd tau_to_gamma(const Eigen::MatrixXd& tau) {
  Eigen::MatrixXd gamma =
      (tau * (std::numbers::pi / 2.0)).array().sin().matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gamma);
  if (solver.eigenvalues().minCoeff() >= 0.0) return gamma;
  Eigen::MatrixXd repaired = solver.eigenvectors() *
                             solver.eigenvalues().cwiseMax(0.0).asDiagonal() *
                             solver.eigenvectors().transpose();
  // Rescale to unit diagonal so the repaired matrix stays a correlation.
  Eigen::VectorXd scale = repaired.diagonal().cwiseMax(1e-300).cwiseSqrt();
  for (int i = 0; i < repaired.rows(); ++i) {
    for (int j = 0; j < repaired.cols(); ++j) {
      repaired(i, j) /= scale[i] * scale[j];
    }
  }
  repaired = 0.5 * (repaired + repaired.transpose());
  if ((repaired - gamma).norm() > 1e-6) {
    throw std::invalid_argument("tau_to_gamma: Gamma is irreparably indefinite");
  }
  return repaired;
}

DataMatrix sample_copula(const TauModel& model, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_copula: n must be >= 1");
  const Eigen::MatrixXd gamma = tau_to_gamma(model.tau);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gamma);
  Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = solver.eigenvectors() * roots.asDiagonal();
  DataMatrix data;
  data.values.resize(n, model.d);
  for (int i = 0; i < n; ++i) {
    data.values.row(i) = (factor * rng.normal_vector(model.d)).transpose();
  }
  return data;
}

namespace {

struct CellResult {
  int rejections = 0;
};

bool run_method(const std::string& method, const DataMatrix& data,
                const KernelSpec& kernel, double Delta, double rho,
                double dp_delta, const HdTestOptions& options, Rng& rng) {
  PrivacyBudget budget(rho, dp_delta);
  if (method == "phdu") {
    return p_hd_u_test(data, kernel, Delta, rho, dp_delta, options, rng,
                       budget)
        .reject;
  }
  if (method == "hoeffding") {
    const UStatResult result = compute_ustat(data, kernel, false);
    return hoeffding_test(result.u.cwiseAbs().maxCoeff(), result.n,
                          kernel.output_dim, kernel.order, kernel.bound,
                          Delta, options.alpha, /*private_release=*/true, rho,
                          rng, &budget)
        .reject;
  }
  if (method == "gumbel") {
    const UStatResult result = compute_ustat(data, kernel, false);
    GumbelOptions gumbel_options;
    gumbel_options.gamma = options.gamma;
    gumbel_options.literal_scale = options.literal_gumbel_scale;
    return p_gumbel_test(result.u, kernel.order, kernel.bound, result.n,
                         Delta, options.alpha, rho, gumbel_options, rng,
                         &budget)
        .reject;
  }
  throw std::invalid_argument("run_power_experiment: unknown method " + method);
}

}  // namespace

std::vector<PowerRow> run_power_experiment(const ExperimentConfig& config) {
  if (config.reps < 1) {
    throw std::invalid_argument("run_power_experiment: reps must be >= 1");
  }
  if (config.delta_grid.empty()) {
    throw std::invalid_argument("run_power_experiment: empty Delta grid");
  }
  for (std::size_t i = 1; i < config.delta_grid.size(); ++i) {
    if (config.delta_grid[i] >= config.delta_grid[i - 1]) {
      throw std::invalid_argument("run_power_experiment: Delta grid must be descending");
    }
  }
  const double dp_delta =
      config.dp_delta > 0.0 ? config.dp_delta : 1.0 / config.n;
  const KernelSpec kernel = kendall_kernel(config.model.d, config.band_gap);
  HdTestOptions options;
  options.alpha = config.alpha;
  options.B = config.B;
  options.gamma = config.gamma;
  options.gap_budget_fraction = config.gap_budget_fraction;

  Rng root(config.seed);
  std::vector<PowerRow> rows;
  for (std::size_t ri = 0; ri < config.rho_list.size(); ++ri) {
    for (std::size_t di = 0; di < config.delta_grid.size(); ++di) {
      std::vector<CellResult> per_method(config.methods.size());
      Rng cell = root.substream(ri * 65536 + di);
      for (int rep = 0; rep < config.reps; ++rep) {
        Rng rep_rng = cell.substream(static_cast<std::uint64_t>(rep));
        Rng data_rng = rep_rng.substream(0);
        const DataMatrix data = sample_copula(config.model, config.n, data_rng);
        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
          Rng method_rng = rep_rng.substream(1 + mi);
          if (run_method(config.methods[mi], data, kernel,
                         config.delta_grid[di], config.rho_list[ri], dp_delta,
                         options, method_rng)) {
            ++per_method[mi].rejections;
          }
        }
      }
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        PowerRow row;
        row.model = config.model.name;
        row.n = config.n;
        row.d = config.model.d;
        row.rho = config.rho_list[ri];
        row.delta = config.delta_grid[di];
        row.method = config.methods[mi];
        row.reject_rate =
            static_cast<double>(per_method[mi].rejections) / config.reps;
        row.reps = config.reps;
        row.seed = config.seed;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows) {
  out << "model,n,d,rho,Delta,method,rejectRate,reps,seed\n";
  for (const auto& row : rows) {
    out << row.model << ',' << row.n << ',' << row.d << ',' << row.rho << ','
        << row.delta << ',' << row.method << ',' << row.reject_rate << ','
        << row.reps << ',' << row.seed << '\n';
  }
}

}  // namespace privdep
