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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "privdep/simulate.hpp"
#include "privdep/ustat.hpp"

using privdep::DataMatrix;
using privdep::Rng;
using privdep::TauModel;

TEST_CASE("built-in tau designs") {
  const TauModel f2 = privdep::build_tau("F2", 5);
  int nonzero = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      if (f2.tau(i, j) != 0.0) {
        ++nonzero;
        CHECK(f2.tau(i, j) == 0.5);
      }
    }
  }
  CHECK(nonzero == 3);

  const TauModel f1 = privdep::build_tau("F1", 4);  // floor(4/sqrt 2) = 2
  int f1_nonzero = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (f1.tau(i, j) != 0.0) ++f1_nonzero;
    }
  }
  CHECK(f1_nonzero == 1);

  const TauModel u1 = privdep::build_tau("U1", 10);
  double max_offdiag = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      max_offdiag = std::max(max_offdiag, u1.tau(i, j));
    }
  }
  CHECK(max_offdiag == doctest::Approx(0.5).epsilon(1e-12));

  const TauModel u2 = privdep::build_tau("U2", 10);  // m = 7
  CHECK(u2.tau(0, 1) == 0.5);
  CHECK(u2.tau(7, 8) == 0.25);
  CHECK(u2.tau(0, 8) == 0.0);

  CHECK_THROWS_AS((void)privdep::build_tau("F1", 2), std::invalid_argument);
  CHECK_THROWS_AS((void)privdep::build_tau("X9", 5), std::invalid_argument);
}

TEST_CASE("sin map sanity against the analytic tau") {
  // For a bivariate normal with correlation g, tau = (2/pi) asin(g); the
  // copula map inverts this relationship.
  for (double g : {0.0, 0.5, 0.9}) {
    const double tau = 2.0 / std::numbers::pi * std::asin(g);
    Eigen::MatrixXd t(2, 2);
    t << 1.0, tau, tau, 1.0;
    const TauModel model = privdep::custom_tau(t);
    CHECK(privdep::tau_to_gamma(model.tau)(0, 1) == doctest::Approx(g));
    Rng rng(81);
    const DataMatrix data = privdep::sample_copula(model, 5000, rng);
    const auto result =
        privdep::compute_ustat(data, privdep::kendall_kernel(2), false);
    CHECK(std::abs(result.u[0] - tau) <= 0.03);
  }
}

TEST_CASE("copula samples behave like the target") {
  const TauModel independent =
      privdep::custom_tau(Eigen::MatrixXd::Identity(4, 4));
  Rng rng(82);
  const DataMatrix data = privdep::sample_copula(independent, 4000, rng);
  const auto result =
      privdep::compute_ustat(data, privdep::kendall_kernel(4), false);
  CHECK(result.u.cwiseAbs().maxCoeff() <= 3.0 / std::sqrt(4000.0));

  const TauModel f2 = privdep::build_tau("F2", 5);
  Rng rng2(83);
  const DataMatrix dependent = privdep::sample_copula(f2, 5000, rng2);
  const auto u2 =
      privdep::compute_ustat(dependent, privdep::kendall_kernel(5), false);
  CHECK(u2.u[0] == doctest::Approx(0.5).epsilon(0.06));  // pair (1,2)

  Rng ra(84), rb(84);
  const DataMatrix first = privdep::sample_copula(f2, 50, ra);
  const DataMatrix second = privdep::sample_copula(f2, 50, rb);
  CHECK((first.values - second.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("irreparably indefinite tau is rejected") {
  Eigen::MatrixXd bad(3, 3);
  bad << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
  CHECK_THROWS_AS((void)privdep::tau_to_gamma(bad), std::invalid_argument);
}

TEST_CASE("power experiment output schema and determinism") {
  privdep::ExperimentConfig config;
  config.model = privdep::build_tau("F2", 6);
  config.n = 120;
  config.rho_list = {1.0};
  config.delta_grid = {1.5};
  config.reps = 25;
  config.B = 80;
  config.seed = 7;
  config.methods = {"phdu", "hoeffding"};
  const auto rows = privdep::run_power_experiment(config);
  REQUIRE(rows.size() == 2);
  // A threshold beyond the kernel bound is never rejected.
  CHECK(rows[0].reject_rate <= 0.01);
  CHECK(rows[1].reject_rate <= 0.01);

  std::ostringstream a, b;
  privdep::write_power_csv(a, rows);
  privdep::write_power_csv(b, privdep::run_power_experiment(config));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("model,n,d,rho,Delta,method,rejectRate,reps,seed\n",
                      0) == 0);
}

TEST_CASE("power grows with the sample size below the boundary") {
  auto rate_at = [](int n, int d, double Delta) {
    privdep::ExperimentConfig config;
    config.model = privdep::build_tau("F2", d);
    config.n = n;
    config.rho_list = {1.0};
    config.delta_grid = {Delta};
    config.reps = 60;
    config.B = 100;
    config.seed = 11;
    return privdep::run_power_experiment(config).front().reject_rate;
  };
  for (double Delta : {0.45, 0.40, 0.35}) {
    const double small = rate_at(250, 23, Delta);
    const double large = rate_at(1000, 45, Delta);
    CHECK(large >= small - 0.05);
  }
}
