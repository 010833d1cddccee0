// Copyright 2026 The Script Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Brute-force references and closed-form determinant facts. Everything in
// here is deliberately independent of the greedy selection path in
// qcsp.hpp: determinants come from LU, volumes from Householder QR, and the
// regularized greedy evaluates log-determinants directly.

#ifndef SCRIPT_ORACLE_HPP_
#define SCRIPT_ORACLE_HPP_

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "script/common.hpp"

namespace script::oracle {

/// Determinants with magnitude below this are treated as exactly zero when
/// comparing subsets.
inline constexpr double kDetZero = 1e-12;
inline constexpr double kMaxSubsets = 1e6;

/// LU with partial pivoting.
inline double determinant(Matrix a) {
  require(a.rows() == a.cols(), Errc::kDimensionMismatch,
          "determinant: matrix must be square");
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (a(p, c) == 0.0) return 0.0;
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(p, k), a(c, k));
      det = -det;
    }
    const double piv = a(c, c);
    det *= piv;
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / piv;
      if (f == 0.0) continue;
      for (std::size_t k = c + 1; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

inline double snap_zero(double det) {
  return std::abs(det) < kDetZero ? 0.0 : det;
}

inline Matrix gram_of_columns(const Matrix& v) { return gram_rows(v.transposed()); }

/// det(V^T V) for V of shape d x k (vectors are columns).
inline double gram_det(const Matrix& v) { return determinant(gram_of_columns(v)); }

/// k-volume of the parallelotope spanned by the columns of V (d x k), as
/// |det R| from a Householder QR. Zero when k > d.
inline double parallelotope_volume(const Matrix& v) {
  const std::size_t d = v.rows(), k = v.cols();
  if (k > d) return 0.0;
  Matrix r = v;
  double vol = 1.0;
  std::vector<double> h(d);
  for (std::size_t c = 0; c < k; ++c) {
    double nrm = 0.0;
    for (std::size_t i = c; i < d; ++i) nrm += r(i, c) * r(i, c);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    const double alpha = r(c, c) > 0 ? -nrm : nrm;
    for (std::size_t i = c; i < d; ++i) h[i] = r(i, c);
    h[c] -= alpha;
    double hh = 0.0;
    for (std::size_t i = c; i < d; ++i) hh += h[i] * h[i];
    if (hh > 0.0) {
      for (std::size_t j = c; j < k; ++j) {
        double s = 0.0;
        for (std::size_t i = c; i < d; ++i) s += h[i] * r(i, j);
        const double f = 2.0 * s / hh;
        for (std::size_t i = c; i < d; ++i) r(i, j) -= f * h[i];
      }
    }
    vol *= std::abs(r(c, c));
  }
  return vol;
}

inline double min_eigenvalue(const Matrix& l) {
  require(l.rows() == l.cols(), Errc::kDimensionMismatch,
          "min_eigenvalue: matrix must be square");
  if (l.rows() == 0) return 0.0;
  Eigen::MatrixXd m(l.rows(), l.cols());
  for (std::size_t i = 0; i < l.rows(); ++i)
    for (std::size_t j = 0; j < l.cols(); ++j) m(i, j) = l(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// n choose k as a double (saturates at +inf).
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Calls f(subset) for every size-k subset in lexicographic order.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k > n) return;
  while (true) {
    f(static_cast<const std::vector<std::size_t>&>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline void check_subset_budget(std::size_t n, std::size_t k) {
  require(k <= n, Errc::kOutOfRange,
          "subset size " + std::to_string(k) + " exceeds n = " +
              std::to_string(n));
  require(binomial(n, k) <= kMaxSubsets, Errc::kTooLarge,
          "exhaustive search over C(" + std::to_string(n) + ", " +
              std::to_string(k) + ") subsets exceeds the 1e6 guard");
}

struct SubsetValue {
  std::vector<std::size_t> subset;
  double value = 0.0;
};

/// Exhaustive argmax of det(L_S) over |S| = k; the lexicographically
/// smallest subset wins ties.
inline SubsetValue brute_force_map(const Matrix& l, std::size_t k) {
  require(l.rows() == l.cols(), Errc::kDimensionMismatch,
          "brute_force_map: kernel must be square");
  check_subset_budget(l.rows(), k);
  SubsetValue best;
  best.value = -std::numeric_limits<double>::infinity();
  for_each_subset(l.rows(), k, [&](const std::vector<std::size_t>& s) {
    const double det = snap_zero(determinant(l.principal(s)));
    if (det > best.value) {
      best.value = det;
      best.subset = s;
    }
  });
  return best;
}

/// log det(I + A) via Cholesky; A must be PSD.
inline double log_det_regularized(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix c = a;
  for (std::size_t i = 0; i < n; ++i) c(i, i) += 1.0;
  double log_det = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = c(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= c(j, p) * c(j, p);
    require(d > 0.0, Errc::kInvalidArgument,
            "log_det_regularized: I + L is not positive definite");
    const double root = std::sqrt(d);
    c(j, j) = root;
    log_det += 2.0 * std::log(root);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = c(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= c(i, p) * c(j, p);
      c(i, j) = s / root;
    }
  }
  return log_det;
}

/// Exhaustive argmax of log det(I + L_S) over |S| = k.
inline SubsetValue brute_force_regularized(const Matrix& l, std::size_t k) {
  check_subset_budget(l.rows(), k);
  SubsetValue best;
  best.value = -std::numeric_limits<double>::infinity();
  for_each_subset(l.rows(), k, [&](const std::vector<std::size_t>& s) {
    const double v = log_det_regularized(l.principal(s));
    if (v > best.value) {
      best.value = v;
      best.subset = s;
    }
  });
  return best;
}

inline constexpr double kPsdTolerance = 1e-8;

/// Greedy maximization of log det(I + L_S) by marginal gain, ties to the
/// lower index. Returns the subset in selection order.
inline SubsetValue greedy_regularized(const Matrix& l, std::size_t k) {
  require(l.rows() == l.cols(), Errc::kDimensionMismatch,
          "greedy_regularized: kernel must be square");
  require(k <= l.rows(), Errc::kOutOfRange, "greedy_regularized: k > n");
  require(min_eigenvalue(l) >= -kPsdTolerance, Errc::kInvalidArgument,
          "greedy_regularized: kernel is not positive semi-definite");
  SubsetValue out;
  out.value = 0.0;
  std::vector<bool> used(l.rows(), false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best_i = l.rows();
    double best_v = -std::numeric_limits<double>::infinity();
    auto trial = out.subset;
    trial.push_back(0);
    for (std::size_t i = 0; i < l.rows(); ++i) {
      if (used[i]) continue;
      trial.back() = i;
      const double v = log_det_regularized(l.principal(trial));
      if (v > best_v) {
        best_v = v;
        best_i = i;
      }
    }
    used[best_i] = true;
    out.subset.push_back(best_i);
    out.value = best_v;
  }
  return out;
}

struct RedundancyMetrics {
  double rho_max = 0.0;
  double rho_avg = 0.0;
  double rho_inf = 0.0;
};

/// Max, mean, and max-absolute off-diagonal entry of a k x k kernel.
inline RedundancyMetrics rho_metrics(const Matrix& l) {
  require(l.rows() == l.cols(), Errc::kDimensionMismatch,
          "rho_metrics: matrix must be square");
  const std::size_t k = l.rows();
  require(k >= 2, Errc::kInvalidArgument, "rho_metrics: need k >= 2");
  RedundancyMetrics m;
  m.rho_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      m.rho_max = std::max(m.rho_max, l(i, j));
      m.rho_inf = std::max(m.rho_inf, std::abs(l(i, j)));
      sum += l(i, j);
    }
  }
  m.rho_avg = 2.0 * sum / static_cast<double>(k * (k - 1));
  return m;
}

inline constexpr double kUnitDiagonalTolerance = 1e-9;

inline void require_unit_diagonal(const Matrix& l, const char* who) {
  require(l.rows() == l.cols(), Errc::kDimensionMismatch,
          std::string(who) + ": matrix must be square");
  for (std::size_t i = 0; i < l.rows(); ++i)
    require(std::abs(l(i, i) - 1.0) <= kUnitDiagonalTolerance,
            Errc::kInvalidArgument,
            std::string(who) + ": diagonal entry " + std::to_string(i) +
                " is not 1");
}

/// [1 - (k-1) rho_inf]_+^k, a lower bound on det for unit-diagonal PSD L.
inline double gershgorin_lower_bound(const Matrix& l) {
  require_unit_diagonal(l, "gershgorin_lower_bound");
  const std::size_t k = l.rows();
  if (k < 2) return 1.0;
  const double base =
      std::max(0.0, 1.0 - static_cast<double>(k - 1) * rho_metrics(l).rho_inf);
  return std::pow(base, static_cast<double>(k));
}

/// Feasible correlation range for a k x k unit-diagonal equicorrelation.
inline double equicorrelation_lower_limit(std::size_t k) {
  return k < 2 ? -1.0 : -1.0 / static_cast<double>(k - 1);
}

/// (1 + (k-1) rho)(1 - rho)^(k-1): the largest det attainable by a
/// unit-diagonal PSD matrix with mean off-diagonal rho.
inline double refined_upper_bound(std::size_t k, double rho_avg) {
  require(k >= 2, Errc::kInvalidArgument, "refined_upper_bound: need k >= 2");
  require(rho_avg >= equicorrelation_lower_limit(k) && rho_avg < 1.0,
          Errc::kInvalidArgument,
          "refined_upper_bound: rho_avg " + std::to_string(rho_avg) +
              " outside [-1/(k-1), 1)");
  const double km1 = static_cast<double>(k - 1);
  return (1.0 + km1 * rho_avg) * std::pow(1.0 - rho_avg, km1);
}

/// Unit diagonal, every off-diagonal equal to rho.
inline Matrix equicorrelation_matrix(std::size_t k, double rho) {
  require(k >= 1, Errc::kInvalidArgument, "equicorrelation: need k >= 1");
  require(rho >= equicorrelation_lower_limit(k) && rho <= 1.0,
          Errc::kInvalidArgument,
          "equicorrelation: rho " + std::to_string(rho) +
              " outside [-1/(k-1), 1]");
  Matrix m(k, k, rho);
  for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
  return m;
}

/// 1 - det(L_S) for a unit-diagonal Gram; never negative up to rounding.
inline double hadamard_margin(const Matrix& l) {
  require_unit_diagonal(l, "hadamard_margin");
  return 1.0 - determinant(l);
}

}  // namespace script::oracle

#endif  // SCRIPT_ORACLE_HPP_
