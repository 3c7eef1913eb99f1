#pragma once

// Dense matrices over exact scalars, plus fraction-field elimination
// (determinant, inverse, rank, linear solve). Zero-dimensional matrices are
// legal everywhere; the empty product convention makes det of a 0x0 matrix 1.

#include "kwitness/ring.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <vector>

namespace kwitness {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<Scalar> e;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), e(static_cast<size_t>(r) * static_cast<size_t>(c)) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative dimension");
  }
  Matrix(std::initializer_list<std::initializer_list<Scalar>> init) {
    rows = static_cast<int>(init.size());
    cols = rows == 0 ? 0 : static_cast<int>(init.begin()->size());
    e.reserve(static_cast<size_t>(rows) * cols);
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols)
        throw std::invalid_argument("Matrix: ragged initializer");
      for (const auto& v : row) e.push_back(v);
    }
  }

  static Matrix zero(int r, int c) { return Matrix(r, c); }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Scalar(1);
    return m;
  }

  Scalar& at(int i, int j) { return e[static_cast<size_t>(i) * cols + j]; }
  const Scalar& at(int i, int j) const { return e[static_cast<size_t>(i) * cols + j]; }

  bool operator==(const Matrix&) const = default;

  bool is_zero() const {
    for (const auto& s : e)
      if (!s.is_zero()) return false;
    return true;
  }

  bool is_identity() const {
    if (rows != cols) return false;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        if (at(i, j) != Scalar(i == j ? 1 : 0)) return false;
    return true;
  }

  Matrix transpose() const {
    Matrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  Matrix sub_rows(int lo, int count) const {
    Matrix r(count, cols);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < cols; ++j) r.at(i, j) = at(lo + i, j);
    return r;
  }

  Matrix sub_cols(int lo, int count) const {
    Matrix r(rows, count);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < count; ++j) r.at(i, j) = at(i, lo + j);
    return r;
  }

  Matrix column(int j) const { return sub_cols(j, 1); }
};

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("Matrix: addition shape mismatch");
  Matrix r(a.rows, a.cols);
  for (size_t k = 0; k < r.e.size(); ++k) r.e[k] = a.e[k] + b.e[k];
  return r;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("Matrix: subtraction shape mismatch");
  Matrix r(a.rows, a.cols);
  for (size_t k = 0; k < r.e.size(); ++k) r.e[k] = a.e[k] - b.e[k];
  return r;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("Matrix: product shape mismatch");
  Matrix r(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const Scalar& aik = a.at(i, k);
      if (aik.is_zero()) continue;
      for (int j = 0; j < b.cols; ++j) {
        const Scalar& bkj = b.at(k, j);
        if (!bkj.is_zero()) r.at(i, j) += aik * bkj;
      }
    }
  return r;
}

inline Matrix operator*(const Scalar& s, const Matrix& a) {
  Matrix r(a.rows, a.cols);
  for (size_t k = 0; k < r.e.size(); ++k) r.e[k] = s * a.e[k];
  return r;
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("Matrix: hstack row mismatch");
  Matrix r(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
    for (int j = 0; j < b.cols; ++j) r.at(i, a.cols + j) = b.at(i, j);
  }
  return r;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("Matrix: vstack column mismatch");
  Matrix r(a.rows + b.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
  for (int i = 0; i < b.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(a.rows + i, j) = b.at(i, j);
  return r;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix r(a.rows + b.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
  for (int i = 0; i < b.rows; ++i)
    for (int j = 0; j < b.cols; ++j) r.at(a.rows + i, a.cols + j) = b.at(i, j);
  return r;
}

inline Matrix matrix_pow(const Matrix& m, unsigned long k) {
  if (m.rows != m.cols) throw std::invalid_argument("matrix_pow: square matrix required");
  Matrix acc = Matrix::identity(m.rows);
  for (unsigned long i = 0; i < k; ++i) acc = acc * m;
  return acc;
}

inline bool entries_in_ring(const Matrix& m, const RingSpec& ring) {
  for (const auto& s : m.e)
    if (!scalar_in_ring(s, ring)) return false;
  return true;
}

// Gaussian elimination over the fraction field; pivot choice is the first
// nonzero entry, so results are deterministic.
namespace detail {

struct Elimination {
  Matrix m;
  std::vector<int> pivot_cols;
  int sign = 1;  // row-swap parity
};

inline Elimination eliminate(Matrix m) {
  Elimination out;
  int pr = 0;
  for (int c = 0; c < m.cols && pr < m.rows; ++c) {
    int sel = -1;
    for (int r = pr; r < m.rows; ++r)
      if (!m.at(r, c).is_zero()) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    if (sel != pr) {
      for (int j = 0; j < m.cols; ++j) std::swap(m.at(sel, j), m.at(pr, j));
      out.sign = -out.sign;
    }
    const Scalar piv = m.at(pr, c);
    for (int r = pr + 1; r < m.rows; ++r) {
      if (m.at(r, c).is_zero()) continue;
      Scalar f = m.at(r, c) / piv;
      for (int j = c; j < m.cols; ++j) m.at(r, j) -= f * m.at(pr, j);
    }
    out.pivot_cols.push_back(c);
    ++pr;
  }
  out.m = std::move(m);
  return out;
}

}  // namespace detail

inline int rank_exact(const Matrix& m) {
  return static_cast<int>(detail::eliminate(m).pivot_cols.size());
}

inline Scalar det_exact(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("det_exact: square matrix required");
  auto el = detail::eliminate(m);
  if (static_cast<int>(el.pivot_cols.size()) < m.rows) return Scalar(0);
  Scalar d(el.sign);
  for (int i = 0; i < m.rows; ++i) d *= el.m.at(i, i);
  return d;
}

// solves A*X = B exactly; nullopt when inconsistent. With free columns the
// free coordinates are set to zero, so full-column-rank systems give the
// unique solution.
inline std::optional<Matrix> solve_exact(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("solve_exact: shape mismatch");
  auto el = detail::eliminate(hstack(a, b));
  Matrix& m = el.m;
  // any pivot landing in the augmented block means an inconsistent system
  for (int c : el.pivot_cols)
    if (c >= a.cols) return std::nullopt;
  // back substitution to reduced form on the pivot columns
  for (int k = static_cast<int>(el.pivot_cols.size()) - 1; k >= 0; --k) {
    int c = el.pivot_cols[k];
    Scalar piv = m.at(k, c);
    for (int j = c; j < m.cols; ++j) m.at(k, j) = m.at(k, j) / piv;
    for (int r = 0; r < k; ++r) {
      Scalar f = m.at(r, c);
      if (f.is_zero()) continue;
      for (int j = c; j < m.cols; ++j) m.at(r, j) -= f * m.at(k, j);
    }
  }
  Matrix x(a.cols, b.cols);
  for (size_t k = 0; k < el.pivot_cols.size(); ++k)
    for (int j = 0; j < b.cols; ++j) x.at(el.pivot_cols[k], j) = m.at(static_cast<int>(k), a.cols + j);
  return x;
}

// a singular m forces a pivot into the augmented identity block, so
// solve_exact already reports it as inconsistent
inline std::optional<Matrix> inverse_exact(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("inverse_exact: square matrix required");
  return solve_exact(m, Matrix::identity(m.rows));
}

}  // namespace kwitness
