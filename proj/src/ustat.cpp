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

#include "privdep/ustat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "privdep/stats.hpp"

namespace privdep {

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

void check_kernel(const DataMatrix& data, const KernelSpec& kernel) {
  data.validate();
  if (kernel.order < 1) throw std::invalid_argument("kernel order must be >= 1");
  if (kernel.output_dim < 1) {
    throw std::invalid_argument("kernel output_dim must be >= 1");
  }
  if (kernel.data_dim > 0 && kernel.data_dim != data.d()) {
    throw DataError("kernel expects " + std::to_string(kernel.data_dim) +
                    " columns, data has " + std::to_string(data.d()));
  }
}

// Count tie pairs sum C(g, 2) over runs of equal adjacent values in a sorted
// range.
std::int64_t tie_pairs_sorted(std::span<const double> sorted) {
  std::int64_t total = 0;
  std::size_t s = 0;
  while (s < sorted.size()) {
    std::size_t e = s + 1;
    while (e < sorted.size() && sorted[e] == sorted[s]) ++e;
    const std::int64_t g = static_cast<std::int64_t>(e - s);
    total += g * (g - 1) / 2;
    s = e;
  }
  return total;
}

// Strict inversions (i < j with a[i] > a[j]) via merge sort; `a` is
// overwritten with its sorted order.
std::int64_t count_inversions(std::vector<double>& a,
                              std::vector<double>& scratch) {
  const std::size_t n = a.size();
  scratch.resize(n);
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[j] < a[i]) {
          inversions += static_cast<std::int64_t>(mid - i);
          scratch[k++] = a[j++];
        } else {
          scratch[k++] = a[i++];
        }
      }
      while (i < mid) scratch[k++] = a[i++];
      while (j < hi) scratch[k++] = a[j++];
      std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
                scratch.begin() + static_cast<std::ptrdiff_t>(hi),
                a.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inversions;
}

struct ColumnOrder {
  std::vector<int> order;      // row indices sorted ascending by value
  std::int64_t tie_pairs = 0;  // sum C(g, 2) over tie groups
};

ColumnOrder sort_column(const Eigen::MatrixXd& x, int col) {
  ColumnOrder co;
  const int n = static_cast<int>(x.rows());
  co.order.resize(static_cast<std::size_t>(n));
  std::iota(co.order.begin(), co.order.end(), 0);
  std::sort(co.order.begin(), co.order.end(), [&](int a, int b) {
    if (x(a, col) != x(b, col)) return x(a, col) < x(b, col);
    return a < b;
  });
  std::size_t s = 0;
  while (s < co.order.size()) {
    std::size_t e = s + 1;
    while (e < co.order.size() &&
           x(co.order[e], col) == x(co.order[s], col)) {
      ++e;
    }
    const std::int64_t g = static_cast<std::int64_t>(e - s);
    co.tie_pairs += g * (g - 1) / 2;
    s = e;
  }
  return co;
}

// Sum of sign(x_ki - x_li) * sign(x_kj - x_lj) over all row pairs k < l for
// one column pair, via Knight's inversion-count algorithm. Exactly equal to
// the O(n^2) definitional sum (all counts are integers).
std::int64_t kendall_pair_sum(const Eigen::MatrixXd& x, int col_i, int col_j,
                              const ColumnOrder& order_i,
                              const ColumnOrder& order_j,
                              std::vector<double>& ybuf,
                              std::vector<double>& scratch) {
  const int n = static_cast<int>(x.rows());
  const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
  ybuf.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    ybuf[static_cast<std::size_t>(k)] = x(order_i.order[k], col_j);
  }
  // Sort the j-column inside each tie group of column i; pairs tied in both
  // columns are counted off the sorted segments.
  std::int64_t tied_both = 0;
  std::size_t s = 0;
  while (s < ybuf.size()) {
    std::size_t e = s + 1;
    while (e < ybuf.size() && x(order_i.order[e], col_i) ==
                                  x(order_i.order[s], col_i)) {
      ++e;
    }
    if (e - s > 1) {
      std::sort(ybuf.begin() + static_cast<std::ptrdiff_t>(s),
                ybuf.begin() + static_cast<std::ptrdiff_t>(e));
      tied_both += tie_pairs_sorted(
          std::span<const double>(ybuf.data() + s, e - s));
    }
    s = e;
  }
  const std::int64_t discordant = count_inversions(ybuf, scratch);
  const std::int64_t untied =
      total - order_i.tie_pairs - order_j.tie_pairs + tied_both;
  return untied - 2 * discordant;
}

// Generic path: exact enumeration of all C(n, r) subsets. `row_sums`, when
// non-null, accumulates per-row totals of kernel evaluations containing each
// row (used to downdate leave-one-out replicates).
void enumerate_subsets(const DataMatrix& data, const KernelSpec& kernel,
                       Eigen::VectorXd* total, Eigen::MatrixXd* row_sums) {
  const int n = data.n();
  const int r = kernel.order;
  const int p = kernel.output_dim;
  std::vector<int> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> h(static_cast<std::size_t>(p));
  total->setZero(p);
  if (row_sums != nullptr) row_sums->setZero(n, p);
  while (true) {
    kernel.evaluate(data, idx, h);
    for (int j = 0; j < p; ++j) (*total)[j] += h[static_cast<std::size_t>(j)];
    if (row_sums != nullptr) {
      for (int m : idx) {
        for (int j = 0; j < p; ++j) {
          (*row_sums)(m, j) += h[static_cast<std::size_t>(j)];
        }
      }
    }
    // Next lexicographic r-subset.
    int pos = r - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - r + pos) {
      --pos;
    }
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < r; ++q) {
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
  }
}

}  // namespace

KernelSpec kendall_kernel(int data_dim, int band_gap) {
  if (data_dim < 2) {
    throw std::invalid_argument("kendall_kernel: need at least 2 columns");
  }
  KernelSpec k;
  k.order = 2;
  k.bound = 1.0;
  k.data_dim = data_dim;
  k.band_gap = band_gap;
  k.kendall = true;
  for (int j = 1; j < data_dim; ++j) {
    for (int i = 0; i < j; ++i) {
      if (band_gap >= 2 && j - i < band_gap) continue;
      k.index_map.emplace_back(i, j);
    }
  }
  if (k.index_map.empty()) {
    throw std::invalid_argument("kendall_kernel: band mask retains no pairs");
  }
  k.output_dim = static_cast<int>(k.index_map.size());
  auto pairs = k.index_map;
  k.evaluate = [pairs](const DataMatrix& data, std::span<const int> rows,
                       std::span<double> out) {
    const auto& x = data.values;
    const int a = rows[0];
    const int b = rows[1];
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      const auto [i, j] = pairs[c];
      out[c] = static_cast<double>(sign_of(x(a, i) - x(b, i)) *
                                   sign_of(x(a, j) - x(b, j)));
    }
  };
  return k;
}

UStatResult compute_ustat(const DataMatrix& data, const KernelSpec& kernel,
                          bool with_leave_one_out) {
  check_kernel(data, kernel);
  const int n = data.n();
  const int r = kernel.order;
  const int p = kernel.output_dim;
  const int min_n = with_leave_one_out ? r + 1 : r;
  if (n < min_n) {
    throw DataError("compute_ustat: need n >= " + std::to_string(min_n) +
                    ", got " + std::to_string(n));
  }

  UStatResult result;
  result.n = n;
  result.order = r;
  result.bound = kernel.bound;
  result.u.resize(p);

  const double combos = binomial(n, r);
  const double combos_loo = binomial(n - 1, r);

  if (kernel.kendall) {
    const auto& x = data.values;
    std::vector<ColumnOrder> columns(static_cast<std::size_t>(data.d()));
    std::vector<bool> used(static_cast<std::size_t>(data.d()), false);
    for (const auto& [i, j] : kernel.index_map) {
      used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(j)] = true;
    }
    for (int c = 0; c < data.d(); ++c) {
      if (used[static_cast<std::size_t>(c)]) columns[static_cast<std::size_t>(c)] = sort_column(x, c);
    }
    std::vector<double> ybuf, scratch;
    const double total_pairs = combos;  // C(n, 2)
    std::vector<std::int64_t> pair_sums(kernel.index_map.size());
    for (std::size_t c = 0; c < kernel.index_map.size(); ++c) {
      const auto [i, j] = kernel.index_map[c];
      pair_sums[c] = kendall_pair_sum(x, i, j, columns[static_cast<std::size_t>(i)],
                                      columns[static_cast<std::size_t>(j)], ybuf, scratch);
      result.u[static_cast<Eigen::Index>(c)] =
          static_cast<double>(pair_sums[c]) / total_pairs;
    }
    if (with_leave_one_out) {
      Eigen::MatrixXd loo(n, p);
      for (std::size_t c = 0; c < kernel.index_map.size(); ++c) {
        const auto [i, j] = kernel.index_map[c];
        for (int m = 0; m < n; ++m) {
          std::int64_t row_sum = 0;
          for (int l = 0; l < n; ++l) {
            row_sum += sign_of(x(m, i) - x(l, i)) * sign_of(x(m, j) - x(l, j));
          }
          loo(m, static_cast<Eigen::Index>(c)) =
              static_cast<double>(pair_sums[c] - row_sum) / combos_loo;
        }
      }
      result.leave_one_out = std::move(loo);
    }
    return result;
  }

  if (!kernel.evaluate) {
    throw std::invalid_argument("compute_ustat: kernel has no evaluator");
  }
  Eigen::VectorXd total;
  Eigen::MatrixXd row_sums;
  enumerate_subsets(data, kernel, &total,
                    with_leave_one_out ? &row_sums : nullptr);
  result.u = total / combos;
  if (with_leave_one_out) {
    Eigen::MatrixXd loo(n, p);
    for (int m = 0; m < n; ++m) {
      loo.row(m) = (total.transpose() - row_sums.row(m)) / combos_loo;
    }
    result.leave_one_out = std::move(loo);
  }
  return result;
}

Eigen::MatrixXd leave_one_out_columns(const DataMatrix& data,
                                      const KernelSpec& kernel,
                                      std::span<const int> coords) {
  check_kernel(data, kernel);
  const int n = data.n();
  const int r = kernel.order;
  if (n < r + 1) throw DataError("leave_one_out_columns: need n >= r + 1");
  for (int c : coords) {
    if (c < 0 || c >= kernel.output_dim) {
      throw std::invalid_argument("leave_one_out_columns: coordinate out of range");
    }
  }
  const double combos_loo = binomial(n - 1, r);
  Eigen::MatrixXd loo(n, static_cast<Eigen::Index>(coords.size()));

  if (kernel.kendall) {
    const auto& x = data.values;
    std::vector<double> ybuf, scratch;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const auto [i, j] = kernel.index_map[static_cast<std::size_t>(coords[c])];
      const ColumnOrder oi = sort_column(x, i);
      const ColumnOrder oj = sort_column(x, j);
      const std::int64_t pair_sum =
          kendall_pair_sum(x, i, j, oi, oj, ybuf, scratch);
      for (int m = 0; m < n; ++m) {
        std::int64_t row_sum = 0;
        for (int l = 0; l < n; ++l) {
          row_sum += sign_of(x(m, i) - x(l, i)) * sign_of(x(m, j) - x(l, j));
        }
        loo(m, static_cast<Eigen::Index>(c)) =
            static_cast<double>(pair_sum - row_sum) / combos_loo;
      }
    }
    return loo;
  }

  // Generic kernels recompute all replicates in one enumeration pass.
  Eigen::VectorXd total;
  Eigen::MatrixXd row_sums;
  enumerate_subsets(data, kernel, &total, &row_sums);
  for (int m = 0; m < n; ++m) {
    for (std::size_t c = 0; c < coords.size(); ++c) {
      loo(m, static_cast<Eigen::Index>(c)) =
          (total[coords[c]] - row_sums(m, coords[c])) / combos_loo;
    }
  }
  return loo;
}

namespace {

JackknifeCov jackknife_from_loo(const Eigen::MatrixXd& loo,
                                const Eigen::VectorXd& u_restricted,
                                std::vector<int> indices) {
  const int n = static_cast<int>(loo.rows());
  const int k = static_cast<int>(loo.cols());
  const Eigen::MatrixXd centered =
      loo - Eigen::VectorXd::Ones(n) * u_restricted.transpose();
  JackknifeCov cov;
  cov.indices = std::move(indices);
  cov.zeta.resize(k, k);
  // Upper triangle computed once and mirrored: exact symmetry.
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const double value =
          (n - 1.0) * centered.col(a).dot(centered.col(b));
      cov.zeta(a, b) = value;
      cov.zeta(b, a) = value;
    }
  }
  return cov;
}

}  // namespace

JackknifeCov jackknife_cov(const UStatResult& result,
                           std::span<const int> indices) {
  if (!result.leave_one_out.has_value()) {
    throw std::invalid_argument("jackknife_cov: leave-one-out data missing");
  }
  const int p = static_cast<int>(result.u.size());
  std::vector<int> idx(indices.begin(), indices.end());
  if (idx.empty()) {
    idx.resize(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
  }
  for (int c : idx) {
    if (c < 0 || c >= p) {
      throw std::invalid_argument("jackknife_cov: index out of range");
    }
  }
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd loo(result.leave_one_out->rows(), k);
  Eigen::VectorXd u_restricted(k);
  for (int c = 0; c < k; ++c) {
    loo.col(c) = result.leave_one_out->col(idx[static_cast<std::size_t>(c)]);
    u_restricted[c] = result.u[idx[static_cast<std::size_t>(c)]];
  }
  return jackknife_from_loo(loo, u_restricted, std::move(idx));
}

JackknifeCov jackknife_cov(const DataMatrix& data, const KernelSpec& kernel,
                           const Eigen::VectorXd& u,
                           std::span<const int> indices) {
  std::vector<int> idx(indices.begin(), indices.end());
  const Eigen::MatrixXd loo = leave_one_out_columns(data, kernel, idx);
  Eigen::VectorXd u_restricted(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    u_restricted[static_cast<Eigen::Index>(c)] = u[idx[c]];
  }
  return jackknife_from_loo(loo, u_restricted, std::move(idx));
}

double ustat_sensitivity(const KernelSpec& kernel, int n) {
  if (n < kernel.order) {
    throw std::invalid_argument("ustat_sensitivity: need n >= r");
  }
  return 2.0 * kernel.order * kernel.bound / n;
}

double jackknife_sensitivity(const KernelSpec& kernel, int n, int k) {
  const int r = kernel.order;
  if (n <= r) throw std::invalid_argument("jackknife_sensitivity: need n > r");
  if (k < 1) throw std::invalid_argument("jackknife_sensitivity: need k >= 1");
  const double log_denominator = log_binomial(n - 1, r);
  double sum = 0.0;
  for (int c = 0; c <= r; ++c) {
    const double log_ratio = log_binomial(n - r + c, r - c) - log_denominator;
    sum += std::exp(log_ratio) * binomial(r, c) *
           std::abs(static_cast<double>(c) * n - static_cast<double>(r) * r);
  }
  const double prefactor =
      (n - 1.0) * r / (static_cast<double>(n) * (n - r));
  return prefactor * sum * std::sqrt(2.0) * k * kernel.bound * kernel.bound;
}

DataMatrix tie_jitter(const DataMatrix& data, double sd, Rng& rng) {
  if (!(sd > 0.0)) throw std::invalid_argument("tie_jitter: sd must be > 0");
  DataMatrix out = data;
  for (int i = 0; i < out.n(); ++i) {
    for (int j = 0; j < out.d(); ++j) {
      out.values(i, j) += sd * rng.normal();
    }
  }
  return out;
}

}  // namespace privdep
