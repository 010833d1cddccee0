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

#include "script/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "script/qcsp.hpp"
#include "test_util.hpp"

namespace script::oracle {
namespace {

using testing::error_code_of;
using testing::naive_det;

const double kRootHalf = std::sqrt(0.5);

TEST(Determinant, AgreesWithFullPivotElimination) {
  for (unsigned seed = 0; seed < 50; ++seed) {
    const std::size_t n = 1 + seed % 7;
    const Matrix a = testing::gaussian(n, n, seed);
    EXPECT_NEAR(determinant(a), naive_det(a), 1e-10 * std::max(1.0, std::abs(naive_det(a))));
  }
  EXPECT_EQ(determinant(Matrix(0, 0)), 1.0);
  EXPECT_EQ(determinant(Matrix{{0, 1}, {1, 0}}), -1.0);
  EXPECT_EQ(error_code_of([] { determinant(Matrix(2, 3)); }), Errc::kDimensionMismatch);
}

TEST(BruteForce, Examples) {
  const auto a = brute_force_map(Matrix::identity(4), 2);
  EXPECT_EQ(a.subset, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(a.value, 1.0);

  const Matrix h{{1, 0}, {0, 1}, {kRootHalf, kRootHalf}};
  const Matrix l = DppKernel(h, std::vector<double>(3, 1.0)).materialize();
  const auto b = brute_force_map(l, 2);
  EXPECT_EQ(b.subset, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(b.value, 1.0, 1e-15);

  const auto c = brute_force_map(Matrix{{1, 0.5}, {0.5, 1}}, 2);
  EXPECT_EQ(c.subset, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(c.value, 0.75);
}

TEST(BruteForce, GuardAndErrors) {
  EXPECT_EQ(error_code_of([] { check_subset_budget(40, 20); }), Errc::kTooLarge);
  EXPECT_NO_THROW(check_subset_budget(20, 10));
  EXPECT_EQ(error_code_of([] { brute_force_map(Matrix::identity(3), 4); }), Errc::kOutOfRange);
  EXPECT_EQ(binomial(5, 2), 10.0);
  EXPECT_EQ(binomial(3, 5), 0.0);
}

TEST(BruteForce, VisitsSubsetsLexicographically) {
  std::vector<std::vector<std::size_t>> seen;
  for_each_subset(4, 2, [&](const std::vector<std::size_t>& s) { seen.push_back(s); });
  EXPECT_EQ(seen, (std::vector<std::vector<std::size_t>>{
                      {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}));
  int count = 0;
  for_each_subset(3, 0, [&](const std::vector<std::size_t>& s) {
    EXPECT_TRUE(s.empty());
    ++count;
  });
  EXPECT_EQ(count, 1);
}

TEST(BruteForce, NearSingularDeterminantsTieAtZero) {
  // Every pair of a rank-1 kernel has det ~ 0; lexicographic winner.
  Matrix l(3, 3, 1.0);
  l(0, 1) = l(1, 0) = 1.0 - 1e-15;
  const auto r = brute_force_map(l, 2);
  EXPECT_EQ(r.subset, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.value, 0.0);
}

TEST(Volume, Examples) {
  const Matrix ortho{{1, 0}, {0, 1}, {0, 0}};
  EXPECT_NEAR(gram_det(ortho), 1.0, 1e-15);
  EXPECT_NEAR(parallelotope_volume(ortho), 1.0, 1e-15);
  const Matrix dup{{1, 1}, {2, 2}, {3, 3}};
  EXPECT_NEAR(gram_det(dup), 0.0, 1e-12);
  EXPECT_NEAR(parallelotope_volume(dup), 0.0, 1e-7);
  const Matrix tilt{{1, kRootHalf}, {0, kRootHalf}};
  EXPECT_NEAR(gram_det(tilt), 0.5, 1e-15);
  EXPECT_NEAR(parallelotope_volume(tilt), 0.70711, 1e-5);
  EXPECT_EQ(parallelotope_volume(Matrix{{1, 0, 1}, {0, 1, 1}}), 0.0);
}

TEST(Volume, SquareMatchesGramDeterminant) {
  std::mt19937 gen(1);
  for (unsigned trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + gen() % 10, k = 1 + gen() % d;
    const Matrix v = testing::gaussian(d, k, trial);
    const double g = gram_det(v), vol = parallelotope_volume(v);
    ASSERT_LE(std::abs(g - vol * vol), 1e-8 * std::max(1.0, g));
  }
}

TEST(Rho, Examples) {
  const auto id = rho_metrics(Matrix::identity(3));
  EXPECT_EQ(id.rho_max, 0.0);
  EXPECT_EQ(id.rho_avg, 0.0);
  EXPECT_EQ(id.rho_inf, 0.0);
  const auto eq = rho_metrics(equicorrelation_matrix(4, -0.2));
  EXPECT_DOUBLE_EQ(eq.rho_max, -0.2);
  EXPECT_DOUBLE_EQ(eq.rho_avg, -0.2);
  EXPECT_DOUBLE_EQ(eq.rho_inf, 0.2);
  const auto two = rho_metrics(Matrix{{1, 0.2}, {0.2, 1}});
  EXPECT_EQ(two.rho_max, 0.2);
  EXPECT_EQ(two.rho_avg, 0.2);
  EXPECT_EQ(two.rho_inf, 0.2);
  EXPECT_EQ(error_code_of([] { rho_metrics(Matrix{{1}}); }), Errc::kInvalidArgument);
}

TEST(Gershgorin, Examples) {
  EXPECT_EQ(gershgorin_lower_bound(Matrix::identity(3)), 1.0);
  const Matrix half{{1, 0.5}, {0.5, 1}};
  EXPECT_DOUBLE_EQ(gershgorin_lower_bound(half), 0.25);
  EXPECT_LE(gershgorin_lower_bound(half), determinant(half));
  EXPECT_EQ(gershgorin_lower_bound(equicorrelation_matrix(3, 0.6)), 0.0);
  EXPECT_EQ(error_code_of([] { gershgorin_lower_bound(Matrix{{1, 0}, {0, 2}}); }),
            Errc::kInvalidArgument);
}

TEST(Refined, Examples) {
  for (std::size_t k = 2; k <= 9; ++k) EXPECT_EQ(refined_upper_bound(k, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(refined_upper_bound(5, 0.5), 0.1875);
  EXPECT_NEAR(refined_upper_bound(5, 1.0 - 1e-9), 0.0, 1e-30);
  EXPECT_EQ(error_code_of([] { refined_upper_bound(3, 1.0); }), Errc::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { refined_upper_bound(3, -0.6); }), Errc::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { refined_upper_bound(1, 0.0); }), Errc::kInvalidArgument);
}

TEST(Equicorrelation, Examples) {
  EXPECT_EQ(equicorrelation_matrix(2, 0.5), (Matrix{{1, 0.5}, {0.5, 1}}));
  EXPECT_DOUBLE_EQ(determinant(equicorrelation_matrix(2, 0.5)), 0.75);
  EXPECT_NEAR(determinant(equicorrelation_matrix(4, -1.0 / 3.0)), 0.0, 1e-15);
  EXPECT_EQ(equicorrelation_matrix(3, 0.0), Matrix::identity(3));
  EXPECT_EQ(error_code_of([] { equicorrelation_matrix(3, -0.6); }), Errc::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { equicorrelation_matrix(3, 1.1); }), Errc::kInvalidArgument);
}

TEST(Equicorrelation, EigenvaluesMatchClosedForm) {
  const Matrix m = equicorrelation_matrix(5, 0.3);
  EXPECT_NEAR(min_eigenvalue(m), 0.7, 1e-12);
  EXPECT_NEAR(determinant(m), (1 + 4 * 0.3) * std::pow(0.7, 4), 1e-12);
}

TEST(Regularized, Examples) {
  EXPECT_NEAR(greedy_regularized(Matrix::identity(4), 2).value, 2 * std::log(2.0), 1e-15);
  const std::vector<double> v = {1.0, 2.0, -0.5};
  Matrix rank1(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rank1(i, j) = v[i] * v[j];
  // det(I + v v^T) restricted to S is 1 + sum_{i in S} v_i^2.
  const auto r = greedy_regularized(rank1, 2);
  EXPECT_EQ(r.subset, (std::vector<std::size_t>{1, 0}));
  EXPECT_NEAR(r.value, std::log(6.0), 1e-12);
}

TEST(Regularized, GuaranteeOnRandomPsdN8K3) {
  const double factor = 1.0 - 1.0 / std::numbers::e;
  for (unsigned seed = 0; seed < 30; ++seed) {
    const Matrix v = testing::gaussian(8, 5, seed);
    const Matrix l = gram_rows(v);
    const double opt = brute_force_regularized(l, 3).value;
    EXPECT_GE(greedy_regularized(l, 3).value, factor * opt);
    EXPECT_NEAR(log_det_regularized(l.principal(brute_force_regularized(l, 3).subset)),
                opt, 1e-12);
  }
}

TEST(Regularized, RejectsIndefiniteKernel) {
  EXPECT_EQ(error_code_of([] { greedy_regularized(Matrix{{1, 2}, {2, 1}}, 1); }),
            Errc::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { greedy_regularized(Matrix::identity(2), 3); }),
            Errc::kOutOfRange);
  EXPECT_NEAR(log_det_regularized(Matrix{{3}}), std::log(4.0), 1e-15);
}

TEST(Hadamard, Examples) {
  EXPECT_EQ(hadamard_margin(Matrix::identity(3)), 0.0);
  const Matrix v = l2_normalize_rows(testing::gaussian(6, 4, 3));
  EXPECT_GE(hadamard_margin(gram_rows(v)), -1e-12);
  const Matrix three_in_plane = l2_normalize_rows(Matrix{{1, 0}, {0, 1}, {1, 1}});
  Matrix g = gram_rows(three_in_plane);
  for (int i = 0; i < 3; ++i) g(i, i) = 1.0;
  EXPECT_NEAR(hadamard_margin(g), 1.0, 1e-12);
  EXPECT_EQ(error_code_of([] { hadamard_margin(Matrix{{2}}); }), Errc::kInvalidArgument);
}

TEST(Witness, LowerMaxCorrelationCanHaveLowerDeterminant) {
  const Matrix neg = equicorrelation_matrix(2, -0.5), zero = equicorrelation_matrix(2, 0.0);
  EXPECT_NEAR(determinant(neg), 0.75, 1e-12);
  EXPECT_NEAR(determinant(zero), 1.0, 1e-12);
  EXPECT_LT(rho_metrics(neg).rho_max, rho_metrics(zero).rho_max);
  EXPECT_LT(determinant(neg), determinant(zero));
}

}  // namespace
}  // namespace script::oracle
