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

#ifndef SCRIPT_COMMON_HPP_
#define SCRIPT_COMMON_HPP_

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace script {

enum class Errc {
  kInvalidArgument,
  kDimensionMismatch,
  kOutOfRange,
  kIo,
  kFormat,
  kTooLarge,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Dense row-major matrix of 64-bit reals.
///
/// Used for token embeddings (one token per row), similarity matrices and
/// kernels alike. Storage on disk is 32-bit; everything in memory is double.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(Errc::kDimensionMismatch,
                  "matrix payload has " + std::to_string(data_.size()) +
                      " values, expected " + std::to_string(rows_ * cols_));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw Error(Errc::kDimensionMismatch, "ragged matrix literal");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Principal submatrix on `idx` (square matrices only).
  Matrix principal(std::span<const std::size_t> idx) const {
    Matrix s(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b)
        s(a, b) = (*this)(idx[a], idx[b]);
    return s;
  }

  /// Rows `idx` in the given order.
  Matrix gather_rows(std::span<const std::size_t> idx) const {
    Matrix s(idx.size(), cols_);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      auto src = row(idx[a]);
      std::copy(src.begin(), src.end(), s.row(a).begin());
    }
    return s;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Token embeddings: n rows (tokens) by d columns (features).
using EmbeddingMatrix = Matrix;

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

/// Inner product summed in ascending index order.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
  return s;
}

/// out[i] = dot(x, rows.row(first + i)) for i in [0, out.size()).
///
/// Four rows are accumulated side by side; each entry is still summed in
/// ascending feature order, so results are bit-identical to dot().
inline void dot_rows(std::span<const double> x, const Matrix& rows,
                     std::size_t first, std::span<double> out) {
  const std::size_t d = x.size();
  std::size_t i = 0;
  for (; i + 4 <= out.size(); i += 4) {
    const double* r0 = rows.row(first + i).data();
    const double* r1 = r0 + d;
    const double* r2 = r1 + d;
    const double* r3 = r2 + d;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double xv = x[t];
      s0 += xv * r0[t];
      s1 += xv * r1[t];
      s2 += xv * r2[t];
      s3 += xv * r3[t];
    }
    out[i] = s0;
    out[i + 1] = s1;
    out[i + 2] = s2;
    out[i + 3] = s3;
  }
  for (; i < out.size(); ++i) out[i] = dot(x, rows.row(first + i));
}


namespace detail {

/// One R x C tile of A * B^T over a kc-long slice of the feature axis.
/// `ap` holds the A rows interleaved (ap[t * R + p]), `bp` the B rows
/// (bp[t * C + q]); `tile` carries the running sums between slices.
template <int R, int C>
[[gnu::always_inline]] inline void nt_micro(const double* ap, const double* bp,
                                            std::size_t kc, double* tile) {
  double s[R][C];
  for (int p = 0; p < R; ++p)
    for (int q = 0; q < C; ++q) s[p][q] = tile[p * C + q];
  for (std::size_t t = 0; t < kc; ++t) {
    const double* b = bp + t * C;
    for (int p = 0; p < R; ++p) {
      const double a = ap[t * R + p];
      for (int q = 0; q < C; ++q) s[p][q] += a * b[q];
    }
  }
  for (int p = 0; p < R; ++p)
    for (int q = 0; q < C; ++q) tile[p * C + q] = s[p][q];
}

/// Packs `m` into panels of W rows, each stored feature-major and padded
/// with zero rows.
template <int W>
std::vector<double> pack_panels(const Matrix& m) {
  const std::size_t d = m.cols();
  const std::size_t panels = (m.rows() + W - 1) / W;
  std::vector<double> out(panels * W * d, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* dst = out.data() + (i / W) * W * d + i % W;
    auto src = m.row(i);
    for (std::size_t t = 0; t < d; ++t) dst[t * W] = src[t];
  }
  return out;
}

/// c = a * b^T, cache-blocked. The feature axis is walked in ascending
/// slices and each tile's sums are carried across slices, so every entry is
/// accumulated in exactly the order dot() uses. With `upper`, tiles lying
/// wholly below the diagonal are skipped.
template <int R, int C>
[[gnu::always_inline]] inline void nt_product(const Matrix& a, const Matrix& b,
                                              Matrix& c, bool upper) {
  constexpr std::size_t kSlice = 256;
  constexpr std::size_t kRowPanels = 64;
  const std::size_t n = a.rows(), m = b.rows(), d = a.cols();
  const std::size_t np = (n + R - 1) / R, mp = (m + C - 1) / C;
  const auto ap = pack_panels<R>(a);
  const auto bp = pack_panels<C>(b);
  double tile[R * C];
  for (std::size_t t0 = 0; t0 < d; t0 += kSlice) {
    const std::size_t kc = std::min(kSlice, d - t0);
    for (std::size_t i0 = 0; i0 < np; i0 += kRowPanels) {
      const std::size_t i1 = std::min(np, i0 + kRowPanels);
      for (std::size_t jb = 0; jb < mp; ++jb) {
        for (std::size_t ib = i0; ib < i1; ++ib) {
          if (upper && (jb + 1) * C <= ib * R) continue;
          const std::size_t rows = std::min<std::size_t>(R, n - ib * R);
          const std::size_t cols = std::min<std::size_t>(C, m - jb * C);
          for (std::size_t p = 0; p < R; ++p)
            for (std::size_t q = 0; q < C; ++q)
              tile[p * C + q] = (t0 > 0 && p < rows && q < cols)
                                    ? c(ib * R + p, jb * C + q)
                                    : 0.0;
          nt_micro<R, C>(ap.data() + ib * R * d + t0 * R,
                         bp.data() + jb * C * d + t0 * C, kc, tile);
          for (std::size_t p = 0; p < rows; ++p)
            for (std::size_t q = 0; q < cols; ++q)
              c(ib * R + p, jb * C + q) = tile[p * C + q];
        }
      }
    }
  }
}

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define SCRIPT_HAVE_AVX2_DISPATCH 1
// No FMA: products and sums round exactly as in the generic path.
[[gnu::target("avx2"), gnu::flatten]] inline void nt_product_avx2(
    const Matrix& a, const Matrix& b, Matrix& c, bool upper) {
  nt_product<4, 8>(a, b, c, upper);
}
#endif

[[gnu::flatten]] inline void nt_product_generic(const Matrix& a,
                                                const Matrix& b, Matrix& c,
                                                bool upper) {
  nt_product<2, 8>(a, b, c, upper);
}

inline void nt_dispatch(const Matrix& a, const Matrix& b, Matrix& c,
                        bool upper) {
#ifdef SCRIPT_HAVE_AVX2_DISPATCH
  static const bool avx2 = __builtin_cpu_supports("avx2");
  if (avx2) return nt_product_avx2(a, b, c, upper);
#endif
  nt_product_generic(a, b, c, upper);
}

}  // namespace detail

/// C(i, j) = dot(a.row(i), b.row(j)).
///
/// Every entry is summed in ascending feature order, so each value is
/// bit-identical to the scalar dot() of the same pair whatever instruction
/// set the host offers.
inline Matrix cross_dots(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), Errc::kDimensionMismatch,
          "cross_dots: column counts differ (" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.cols()) + ")");
  Matrix c(a.rows(), b.rows());
  if (!c.empty()) detail::nt_dispatch(a, b, c, false);
  return c;
}

/// G(i, j) = dot(a.row(i), a.row(j)). Only the upper block triangle is
/// computed; the rest is mirrored (exact, since each entry's sum order is
/// fixed and multiplication commutes).
inline Matrix gram_rows(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix g(n, n);
  if (n == 0) return g;
  detail::nt_dispatch(a, a, g, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

}  // namespace script

#endif  // SCRIPT_COMMON_HPP_
