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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numeric>

#include "privdep/extremal.hpp"
#include "privdep/hdtest.hpp"
#include "privdep/privacy.hpp"
#include "privdep/simulate.hpp"
#include "privdep/ustat.hpp"

namespace py = pybind11;

namespace {

privdep::DataMatrix as_data(const Eigen::MatrixXd& x) {
  privdep::DataMatrix data(x);
  data.validate();
  return data;
}

py::dict extremal_dict(const privdep::ExtremalEstimate& estimate) {
  py::list indices;
  for (int index : estimate.indices) indices.append(index + 1);  // 1-based
  py::dict out;
  out["outcome"] = estimate.bottom ? "bottom" : "set";
  out["indices"] = indices;
  out["kHat"] = estimate.k_hat;
  out["truncated"] = estimate.truncated;
  return out;
}

py::dict ledger_dict(const privdep::PrivacyBudget& budget) {
  py::list entries;
  for (const auto& entry : budget.entries()) {
    py::dict e;
    e["mechanism"] = entry.mechanism;
    e["rho"] = entry.rho;
    e["delta"] = entry.delta;
    entries.append(e);
  }
  py::dict out;
  out["rho"] = budget.rho();
  out["delta"] = budget.delta();
  out["rhoSpent"] = budget.rho_spent();
  out["deltaSpent"] = budget.delta_spent();
  out["entries"] = entries;
  return out;
}

py::dict outcome_dict(const privdep::TestOutcome& outcome,
                      const privdep::PrivacyBudget& budget) {
  py::dict out;
  out["decision"] = outcome.reject;
  out["branch"] = privdep::branch_name(outcome.branch);
  out["delta"] = outcome.delta;
  out["normDP"] = outcome.released_norm_dp;
  out["quantile"] = outcome.quantile;
  out["extremal"] = outcome.extremal.has_value()
                        ? py::object(extremal_dict(*outcome.extremal))
                        : py::object(py::none());
  out["ledger"] = ledger_dict(budget);
  return out;
}

double default_delta(double delta, int n) {
  return delta > 0.0 ? delta : 1.0 / n;
}

}  // namespace

PYBIND11_MODULE(privdep, m) {
  m.doc() = "Differentially private tests for relevant dependencies among "
            "the coordinates of high-dimensional vectors";

  m.def(
      "kendall_ustat",
      [](const Eigen::MatrixXd& x, int band) {
        const privdep::DataMatrix data = as_data(x);
        const privdep::KernelSpec kernel =
            privdep::kendall_kernel(data.d(), band);
        return privdep::compute_ustat(data, kernel, false).u;
      },
      py::arg("x"), py::arg("band") = 0,
      "Exact vector of pairwise Kendall tau U-statistics (vech order).");

  m.def(
      "kendall_pairs",
      [](int d, int band) {
        const privdep::KernelSpec kernel = privdep::kendall_kernel(d, band);
        std::vector<std::pair<int, int>> pairs;
        pairs.reserve(kernel.index_map.size());
        for (const auto& [i, j] : kernel.index_map) {
          pairs.emplace_back(i + 1, j + 1);
        }
        return pairs;
      },
      py::arg("d"), py::arg("band") = 0,
      "Column pairs (1-based) addressed by each output coordinate.");

  m.def(
      "jackknife_cov",
      [](const Eigen::MatrixXd& x, std::vector<int> indices, int band) {
        const privdep::DataMatrix data = as_data(x);
        const privdep::KernelSpec kernel =
            privdep::kendall_kernel(data.d(), band);
        const privdep::UStatResult result =
            privdep::compute_ustat(data, kernel, false);
        if (indices.empty()) {
          indices.resize(static_cast<std::size_t>(kernel.output_dim));
          std::iota(indices.begin(), indices.end(), 0);
        }
        return privdep::jackknife_cov(data, kernel, result.u, indices).zeta;
      },
      py::arg("x"), py::arg("indices") = std::vector<int>{},
      py::arg("band") = 0,
      "Jackknife covariance of the Kendall U-statistic, restricted to the "
      "given 0-based coordinates (all when empty).");

  m.def(
      "ustat_sensitivity",
      [](int n, int order, double bound) {
        privdep::KernelSpec kernel;
        kernel.order = order;
        kernel.bound = bound;
        kernel.output_dim = 1;
        return privdep::ustat_sensitivity(kernel, n);
      },
      py::arg("n"), py::arg("order") = 2, py::arg("bound") = 1.0);

  m.def(
      "jackknife_sensitivity",
      [](int n, int k, int order, double bound) {
        privdep::KernelSpec kernel;
        kernel.order = order;
        kernel.bound = bound;
        kernel.output_dim = 1;
        return privdep::jackknife_sensitivity(kernel, n, k);
      },
      py::arg("n"), py::arg("k"), py::arg("order") = 2, py::arg("bound") = 1.0);

  m.def(
      "tie_jitter",
      [](const Eigen::MatrixXd& x, double sd, std::uint64_t seed) {
        privdep::Rng rng(seed);
        return privdep::tie_jitter(as_data(x), sd, rng).values;
      },
      py::arg("x"), py::arg("sd") = 1e-6, py::arg("seed") = 0);

  m.def(
      "gaussian_mechanism",
      [](double value, double l2_sensitivity, double rho, std::uint64_t seed) {
        privdep::Rng rng(seed);
        return privdep::gaussian_mechanism(value, l2_sensitivity, rho, rng,
                                           nullptr);
      },
      py::arg("value"), py::arg("l2_sensitivity"), py::arg("rho"),
      py::arg("seed") = 0);

  m.def(
      "rl_gap",
      [](const std::vector<double>& q, double epsilon, double l1_sensitivity,
         std::uint64_t seed) {
        privdep::Rng rng(seed);
        return privdep::rl_gap(q, epsilon, l1_sensitivity, nullptr, rng,
                               nullptr);
      },
      py::arg("q"), py::arg("epsilon"), py::arg("l1_sensitivity"),
      py::arg("seed") = 0,
      "Regularizer-free report-noisy-max; returns the 0-based argmax.");

  m.def(
      "ptr_lower_bound",
      [](double q_value, double t, double rho, double delta,
         std::uint64_t seed) {
        privdep::Rng rng(seed);
        const privdep::PtrResult result =
            privdep::ptr_lower_bound(q_value, t, rho, delta, rng, nullptr);
        return py::make_tuple(result.passed, result.q_hat);
      },
      py::arg("q_value"), py::arg("t"), py::arg("rho"), py::arg("delta"),
      py::arg("seed") = 0);

  m.def("zcdp_to_eps_delta", &privdep::zcdp_to_eps_delta, py::arg("rho"),
        py::arg("delta"));

  m.def("svt_epsilon_bound", &privdep::svt_epsilon_bound,
        py::arg("query_sensitivity"), py::arg("sigma1"), py::arg("sigma2"),
        py::arg("c"), py::arg("p"), py::arg("delta"));

  m.def("gumbel_quantile", &privdep::gumbel_quantile, py::arg("alpha"),
        py::arg("scale"));

  m.def(
      "gaps",
      [](const Eigen::VectorXd& u) {
        const privdep::GapVector gap = privdep::gaps(u);
        return py::make_tuple(gap.q, gap.order);
      },
      py::arg("u"),
      "Sorted-|U| consecutive differences and the 0-based ordering.");

  m.def(
      "nonprivate_extremal",
      [](const Eigen::VectorXd& u, int n) {
        return privdep::nonprivate_extremal(u, n);
      },
      py::arg("u"), py::arg("n"));

  m.def(
      "p_rel",
      [](const Eigen::VectorXd& u, int n, double rho, double delta,
         std::uint64_t seed, int order, double bound) {
        privdep::KernelSpec kernel;
        kernel.order = order;
        kernel.bound = bound;
        kernel.output_dim = static_cast<int>(u.size());
        privdep::PrivacyBudget budget(rho, delta);
        privdep::Rng rng(seed);
        return extremal_dict(privdep::p_rel(u, kernel, n, rho, delta, rng,
                                            &budget, nullptr));
      },
      py::arg("u"), py::arg("n"), py::arg("rho"), py::arg("delta"),
      py::arg("seed") = 0, py::arg("order") = 2, py::arg("bound") = 1.0,
      "Adaptive private extremal-set estimate; indices are 1-based.");

  m.def(
      "p_hd_u_test",
      [](const Eigen::MatrixXd& x, double Delta, double rho, double delta,
         double alpha, int B, double gamma, std::uint64_t seed, int band) {
        const privdep::DataMatrix data = as_data(x);
        const privdep::KernelSpec kernel =
            privdep::kendall_kernel(data.d(), band);
        const double dp_delta = default_delta(delta, data.n());
        privdep::PrivacyBudget budget(rho, dp_delta);
        privdep::HdTestOptions options;
        options.alpha = alpha;
        options.B = B;
        options.gamma = gamma;
        privdep::Rng rng(seed);
        const privdep::TestOutcome outcome = privdep::p_hd_u_test(
            data, kernel, Delta, rho, dp_delta, options, rng, budget);
        return outcome_dict(outcome, budget);
      },
      py::arg("x"), py::arg("delta_threshold"), py::arg("rho"),
      py::arg("delta") = 0.0, py::arg("alpha") = 0.05, py::arg("B") = 200,
      py::arg("gamma") = 0.0, py::arg("seed") = 0, py::arg("band") = 0,
      "Private high-dimensional test of H0: max |tau_ij| <= Delta.");

  m.def(
      "hoeffding_test",
      [](const Eigen::MatrixXd& x, double Delta, double rho, double alpha,
         bool private_release, std::uint64_t seed, int band) {
        const privdep::DataMatrix data = as_data(x);
        const privdep::KernelSpec kernel =
            privdep::kendall_kernel(data.d(), band);
        const privdep::UStatResult result =
            privdep::compute_ustat(data, kernel, false);
        privdep::PrivacyBudget budget(rho, 0.0);
        privdep::Rng rng(seed);
        const privdep::TestOutcome outcome = privdep::hoeffding_test(
            result.u.cwiseAbs().maxCoeff(), result.n, kernel.output_dim,
            kernel.order, kernel.bound, Delta, alpha, private_release, rho,
            rng, &budget);
        return outcome_dict(outcome, budget);
      },
      py::arg("x"), py::arg("delta_threshold"), py::arg("rho") = 1.0,
      py::arg("alpha") = 0.05, py::arg("private_release") = true,
      py::arg("seed") = 0, py::arg("band") = 0);

  m.def(
      "scan_delta",
      [](const Eigen::MatrixXd& x, std::vector<double> grid, double rho,
         double delta, double alpha, int B, double gamma, std::uint64_t seed,
         int band) {
        const privdep::DataMatrix data = as_data(x);
        const privdep::KernelSpec kernel =
            privdep::kendall_kernel(data.d(), band);
        const double dp_delta = default_delta(delta, data.n());
        privdep::PrivacyBudget budget(rho, dp_delta);
        privdep::HdTestOptions options;
        options.alpha = alpha;
        options.B = B;
        options.gamma = gamma;
        privdep::Rng rng(seed);
        const privdep::ScanResult scan = privdep::scan_delta(
            data, kernel, grid, rho, dp_delta, options, rng, budget);
        py::dict out = outcome_dict(scan.base, budget);
        out["deltaHat"] = scan.delta_hat;
        out["allRejected"] = scan.all_rejected;
        out["noneRejected"] = scan.none_rejected;
        out["grid"] = scan.grid;
        out["decisions"] = scan.decisions;
        return out;
      },
      py::arg("x"), py::arg("grid"), py::arg("rho"), py::arg("delta") = 0.0,
      py::arg("alpha") = 0.05, py::arg("B") = 200, py::arg("gamma") = 0.0,
      py::arg("seed") = 0, py::arg("band") = 0,
      "Smallest non-rejected threshold over a descending grid; one release.");

  m.def(
      "build_tau",
      [](const std::string& name, int d) {
        return privdep::build_tau(name, d).tau;
      },
      py::arg("name"), py::arg("d"));

  m.def(
      "sample_copula",
      [](const Eigen::MatrixXd& tau, int n, std::uint64_t seed) {
        const privdep::TauModel model = privdep::custom_tau(tau);
        privdep::Rng rng(seed);
        return privdep::sample_copula(model, n, rng).values;
      },
      py::arg("tau"), py::arg("n"), py::arg("seed") = 0,
      "Gaussian copula sample whose population Kendall tau matrix is tau.");
}
