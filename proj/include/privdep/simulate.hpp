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

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "privdep/hdtest.hpp"
#include "privdep/rng.hpp"
#include "privdep/types.hpp"

namespace privdep {

// Kendall-tau target matrix: d x d symmetric, unit diagonal.
struct TauModel {
  std::string name;
  int d = 0;
  Eigen::MatrixXd tau;
};

// The built-in designs. F1: 0.5 on every off-diagonal of the leading
// floor(d/sqrt(2)) block. F2: 0.5 on the three pairs among the first three
// coordinates. U1: scaled rank-one profile with max off-diagonal 0.5 and no
// gap. U2: two blocks with off-diagonals 0.5 and 0.25.
TauModel build_tau(const std::string& name, int d);

TauModel custom_tau(Eigen::MatrixXd tau);

// Gaussian copula map Gamma_ij = sin(pi tau_ij / 2), PSD-repaired
// (eigenvalue clip, unit-diagonal rescale). Throws if the repair moves the
// matrix by more than 1e-6 in Frobenius norm.
Eigen::MatrixXd tau_to_gamma(const Eigen::MatrixXd& tau);

// n iid rows from N_d(0, Gamma); the population Kendall tau of the output
// equals the model's tau.
DataMatrix sample_copula(const TauModel& model, int n, Rng& rng);

struct ExperimentConfig {
  TauModel model;
  int n = 250;
  std::vector<double> rho_list = {1.0};
  std::vector<double> delta_grid;     // thresholds, descending
  double alpha = 0.05;
  int B = 200;
  int reps = 200;
  std::uint64_t seed = 0;
  double dp_delta = 0.0;              // 0 means 1/n
  double gamma = 0.0;
  double gap_budget_fraction = 1.0 / 3.0;
  std::vector<std::string> methods = {"phdu"};  // phdu | hoeffding | gumbel
  int band_gap = 0;
};

struct PowerRow {
  std::string model;
  int n = 0;
  int d = 0;
  double rho = 0.0;
  double delta = 0.0;
  std::string method;
  double reject_rate = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
};

// Monte-Carlo power study: for each (rho, Delta, rep) cell fresh data is
// drawn and every requested method runs on it with its own budget.
// Deterministic given the config (per-cell substreams, fixed aggregation).
std::vector<PowerRow> run_power_experiment(const ExperimentConfig& config);

void write_power_csv(std::ostream& out, const std::vector<PowerRow>& rows);

}  // namespace privdep
