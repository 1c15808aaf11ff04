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
#include <sstream>

#include "privdep/csv.hpp"
#include "privdep/simulate.hpp"
#include "privdep/stats.hpp"
#include "privdep/ustat.hpp"
#include "test_util.hpp"

using privdep::DataMatrix;
using privdep::KernelSpec;
using privdep::Rng;

namespace {

DataMatrix two_columns(std::initializer_list<double> x,
                       std::initializer_list<double> y) {
  DataMatrix data;
  data.values.resize(static_cast<Eigen::Index>(x.size()), 2);
  int i = 0;
  for (double v : x) data.values(i++, 0) = v;
  i = 0;
  for (double v : y) data.values(i++, 1) = v;
  return data;
}

// Order-1 mean kernel on a single column; bound must cover the data range.
KernelSpec mean_kernel(double bound) {
  KernelSpec k;
  k.order = 1;
  k.bound = bound;
  k.output_dim = 1;
  k.evaluate = [](const DataMatrix& data, std::span<const int> rows,
                  std::span<double> out) {
    out[0] = data.values(rows[0], 0);
  };
  return k;
}

}  // namespace

TEST_CASE("kendall on perfectly concordant and discordant columns") {
  const KernelSpec kernel = privdep::kendall_kernel(2);
  CHECK(privdep::compute_ustat(two_columns({1, 2, 3}, {1, 2, 3}), kernel).u[0] ==
        doctest::Approx(1.0));
  CHECK(privdep::compute_ustat(two_columns({1, 2, 3}, {3, 2, 1}), kernel).u[0] ==
        doctest::Approx(-1.0));
  // Enumerating the three row pairs of (1,2,3) vs (2,1,3): -1 + 1 + 1.
  CHECK(privdep::compute_ustat(two_columns({1, 2, 3}, {2, 1, 3}), kernel).u[0] ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("kendall fast path equals the definitional sum exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(46));
    const int d = 2 + static_cast<int>(rng.below(7));
    const bool ties = trial % 2 == 0;
    const DataMatrix data = testutil::random_matrix(rng, n, d, ties);
    const KernelSpec kernel = privdep::kendall_kernel(d);
    const auto result = privdep::compute_ustat(data, kernel, false);
    const Eigen::VectorXd oracle =
        testutil::kendall_oracle(data.values, kernel.index_map);
    CHECK((result.u - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(result.u.cwiseAbs().maxCoeff() <= kernel.bound);
  }
}

TEST_CASE("leave-one-out replicates match recomputation") {
  Rng rng(12);
  const DataMatrix data = testutil::random_matrix(rng, 10, 3);
  const KernelSpec kernel = privdep::kendall_kernel(3);
  const auto result = privdep::compute_ustat(data, kernel, true);
  REQUIRE(result.leave_one_out.has_value());
  const Eigen::MatrixXd oracle =
      testutil::kendall_loo_oracle(data.values, kernel.index_map);
  CHECK((*result.leave_one_out - oracle).cwiseAbs().maxCoeff() <= 1e-12);

  // Restricted columns agree with the full computation.
  const std::vector<int> coords{0, 2};
  const Eigen::MatrixXd restricted =
      privdep::leave_one_out_columns(data, kernel, coords);
  CHECK((restricted.col(0) - result.leave_one_out->col(0)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((restricted.col(1) - result.leave_one_out->col(2)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("leave-one-out mean identity for order-1 kernels") {
  Rng rng(13);
  DataMatrix data;
  data.values.resize(9, 1);
  for (int i = 0; i < 9; ++i) data.values(i, 0) = rng.uniform() - 0.5;
  const auto result = privdep::compute_ustat(data, mean_kernel(1.0), true);
  const double replicate_mean = result.leave_one_out->col(0).mean();
  CHECK(replicate_mean == doctest::Approx(result.u[0]).epsilon(1e-14));
}

TEST_CASE("jackknife of the mean kernel is the sample variance") {
  const DataMatrix data = two_columns({0, 1}, {0, 0});
  auto result = privdep::compute_ustat(data, mean_kernel(1.0), true);
  const auto cov = privdep::jackknife_cov(result, {});
  CHECK(cov.zeta(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("jackknife is zero on constant data") {
  DataMatrix data;
  data.values = Eigen::MatrixXd::Constant(8, 3, 2.5);
  const KernelSpec kernel = privdep::kendall_kernel(3);
  const auto result = privdep::compute_ustat(data, kernel, true);
  const auto cov = privdep::jackknife_cov(result, {});
  CHECK(cov.zeta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jackknife matches brute force on a random kendall instance") {
  Rng rng(14);
  const DataMatrix data = testutil::random_matrix(rng, 10, 3);
  const KernelSpec kernel = privdep::kendall_kernel(3);
  const auto result = privdep::compute_ustat(data, kernel, true);
  const auto cov = privdep::jackknife_cov(result, {});
  const Eigen::MatrixXd loo =
      testutil::kendall_loo_oracle(data.values, kernel.index_map);
  const Eigen::MatrixXd oracle = testutil::jackknife_oracle(loo, result.u);
  CHECK((cov.zeta - oracle).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((cov.zeta - cov.zeta.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jackknife errors without leave-one-out data") {
  Rng rng(15);
  const DataMatrix data = testutil::random_matrix(rng, 10, 3);
  const auto result =
      privdep::compute_ustat(data, privdep::kendall_kernel(3), false);
  CHECK_THROWS_AS((void)privdep::jackknife_cov(result, {}),
                  std::invalid_argument);
}

TEST_CASE("ustat sensitivity closed forms") {
  const KernelSpec kendall = privdep::kendall_kernel(4);
  CHECK(privdep::ustat_sensitivity(kendall, 2000) == doctest::Approx(0.002));
  // The gap threshold doubles it: t = 8/n.
  CHECK(2.0 * privdep::ustat_sensitivity(kendall, 2000) ==
        doctest::Approx(0.004));
  CHECK(privdep::ustat_sensitivity(kendall, 777) == doctest::Approx(4.0 / 777));
  CHECK(privdep::ustat_sensitivity(mean_kernel(1.0), 100) ==
        doctest::Approx(0.02));
}

TEST_CASE("jackknife sensitivity closed form") {
  // r=1, n=2, k=1: prefactor 1/2; c=0 and c=1 terms are both 1.
  CHECK(privdep::jackknife_sensitivity(mean_kernel(1.0), 2, 1) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const KernelSpec kendall = privdep::kendall_kernel(4);
  CHECK(privdep::jackknife_sensitivity(kendall, 100, 10) ==
        doctest::Approx(2.0 * privdep::jackknife_sensitivity(kendall, 100, 5))
            .epsilon(1e-12));

  // Term-by-term independent evaluation, r=2, n=100, k=5.
  const int n = 100;
  double sum = 0.0;
  for (int c = 0; c <= 2; ++c) {
    sum += privdep::binomial(n - 2 + c, 2 - c) / privdep::binomial(n - 1, 2) *
           privdep::binomial(2, c) * std::abs(c * n - 4.0);
  }
  const double expected = (n - 1.0) * 2.0 / (n * (n - 2.0)) * sum *
                          std::sqrt(2.0) * 5.0;
  CHECK(privdep::jackknife_sensitivity(kendall, n, 5) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tie jitter breaks ties, is deterministic, preserves signs") {
  Rng rng(16);
  DataMatrix genotypes;
  genotypes.values.resize(40, 3);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 3; ++j) {
      genotypes.values(i, j) = static_cast<double>(rng.below(3));
    }
  }
  Rng jitter_rng(99);
  const DataMatrix jittered = privdep::tie_jitter(genotypes, 1e-6, jitter_rng);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> column(40);
    for (int i = 0; i < 40; ++i) column[static_cast<std::size_t>(i)] = jittered.values(i, j);
    std::sort(column.begin(), column.end());
    CHECK(std::adjacent_find(column.begin(), column.end()) == column.end());
  }
  Rng jitter_rng2(99);
  const DataMatrix again = privdep::tie_jitter(genotypes, 1e-6, jitter_rng2);
  CHECK((again.values - jittered.values).cwiseAbs().maxCoeff() == 0.0);

  // On tie-free integer-spaced data the sign pattern cannot move.
  Rng rng2(17);
  DataMatrix spaced;
  spaced.values.resize(20, 2);
  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 19; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng2.below(
                  static_cast<std::uint64_t>(i) + 1))]);
  }
  for (int i = 0; i < 20; ++i) {
    spaced.values(i, 0) = i;
    spaced.values(i, 1) = static_cast<double>(perm[static_cast<std::size_t>(i)]);
  }
  Rng jitter_rng3(7);
  const DataMatrix perturbed = privdep::tie_jitter(spaced, 1e-6, jitter_rng3);
  const KernelSpec kernel = privdep::kendall_kernel(2);
  const double before = privdep::compute_ustat(spaced, kernel).u[0];
  const double after = privdep::compute_ustat(perturbed, kernel).u[0];
  CHECK(before == after);  // minimal spacing 1 dwarfs the jitter
}

TEST_CASE("neighbor sensitivity bounds hold empirically") {
  Rng rng(18);
  const int n = 50;
  const KernelSpec kernel = privdep::kendall_kernel(5);
  const double bound = privdep::ustat_sensitivity(kernel, n);  // 4/n
  const double jack_bound = privdep::jackknife_sensitivity(kernel, n, 10);
  for (int trial = 0; trial < 60; ++trial) {
    Rng trial_rng = rng.substream(static_cast<std::uint64_t>(trial));
    const DataMatrix data = testutil::random_matrix(trial_rng, n, 5);
    const int row = static_cast<int>(trial_rng.below(n));
    const DataMatrix neighbor = testutil::replace_row(data, row, trial_rng);
    const auto a = privdep::compute_ustat(data, kernel, true);
    const auto b = privdep::compute_ustat(neighbor, kernel, true);
    CHECK(std::abs(a.u.cwiseAbs().maxCoeff() - b.u.cwiseAbs().maxCoeff()) <=
          bound + 1e-12);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() <= bound + 1e-12);
    const auto ca = privdep::jackknife_cov(a, {});
    const auto cb = privdep::jackknife_cov(b, {});
    CHECK((ca.zeta - cb.zeta).norm() <= jack_bound + 1e-12);
  }
}

TEST_CASE("jackknife tracks n Cov(U) at scale" * doctest::skip(false)) {
  // F2 design, n = 2000; Monte-Carlo oracle for n Cov(U) on all 10
  // coordinates of a d = 5 layout.
  const privdep::TauModel model = privdep::build_tau("F2", 5);
  const KernelSpec kernel = privdep::kendall_kernel(5);
  const int n = 2000;
  Rng rng(20);
  Rng data_rng = rng.substream(0);
  const DataMatrix data = privdep::sample_copula(model, n, data_rng);
  const auto result = privdep::compute_ustat(data, kernel, true);
  const auto jack = privdep::jackknife_cov(result, {});

  const int sims = 320;
  const int p = kernel.output_dim;
  Eigen::MatrixXd draws(sims, p);
  for (int s = 0; s < sims; ++s) {
    Rng sim_rng = rng.substream(static_cast<std::uint64_t>(s) + 1);
    const DataMatrix sim = privdep::sample_copula(model, n, sim_rng);
    draws.row(s) = privdep::compute_ustat(sim, kernel).u.transpose();
  }
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean;
  const Eigen::MatrixXd oracle =
      static_cast<double>(n) * (centered.transpose() * centered) / (sims - 1.0);
  CHECK((jack.zeta - oracle).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("csv ingestion") {
  std::istringstream with_header("a,b\n1,2\n3,4\n");
  const DataMatrix data = privdep::parse_csv(with_header);
  CHECK(data.n() == 2);
  CHECK(data.d() == 2);
  CHECK(data.values(1, 0) == 3.0);

  std::istringstream plain("1.5, 2.5\n-3e-2,4\n");
  const DataMatrix numeric = privdep::parse_csv(plain);
  CHECK(numeric.values(0, 0) == 1.5);
  CHECK(numeric.values(1, 0) == -0.03);

  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS((void)privdep::parse_csv(ragged), privdep::DataError);

  std::istringstream midway_text("1,2\n3,zzz\n");
  CHECK_THROWS_AS((void)privdep::parse_csv(midway_text), privdep::DataError);

  CHECK_THROWS_AS((void)privdep::read_csv("/no/such/file.csv"),
                  privdep::DataError);
}

TEST_CASE("dimension and size preconditions") {
  Rng rng(21);
  const DataMatrix data = testutil::random_matrix(rng, 5, 3);
  CHECK_THROWS_AS(
      (void)privdep::compute_ustat(data, privdep::kendall_kernel(4), false),
      privdep::DataError);
  DataMatrix tiny;
  tiny.values = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(
      (void)privdep::compute_ustat(tiny, privdep::kendall_kernel(3), true),
      privdep::DataError);
}

TEST_CASE("band mask retains the documented pairs") {
  const KernelSpec banded = privdep::kendall_kernel(6, 3);
  for (const auto& [i, j] : banded.index_map) CHECK(j - i >= 3);
  CHECK(banded.output_dim == 6);  // d=6, |i-j|>=3: (0,3..5),(1,4..5),(2,5)
  CHECK_THROWS_AS((void)privdep::kendall_kernel(2, 5), std::invalid_argument);
}
