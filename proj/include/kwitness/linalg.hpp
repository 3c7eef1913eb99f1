#pragma once

// Exact normal forms and lattice primitives over a PID (Z or Z localized at a
// prime). Conventions:
//   - hnf is row-style: h = u * m with u invertible over the ring, h in
//     canonical row echelon form. Pivots are canonical associates (positive
//     integers over Z, powers of p over Z_(p)); entries above a pivot are the
//     canonical residues (in [0, pivot) over Z, integer representatives in
//     [0, p^v) over Z_(p)).
//   - snf: d = u * m * v diagonal with each diagonal entry dividing the next,
//     entries canonical associates.
//   - lattices are saturated column spans with the basis in canonical column
//     echelon form, so lattice equality is matrix equality.

#include "kwitness/matrix.hpp"
#include "kwitness/ring.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kwitness {

struct NotSaturatedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// an algorithm postcondition or a theorem-guaranteed side condition failed;
// always a bug, never an input error
struct InternalInvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

namespace detail {

// For ring elements a, b, not both zero: canonical g with x*a + y*b = g such
// that [[x, y], [-b/g, a/g]] has determinant 1.
struct GcdCombo {
  Scalar g, x, y;
};

inline GcdCombo ring_gcd(const Scalar& a, const Scalar& b, const RingSpec& ring) {
  if (a.is_zero() && b.is_zero())
    throw std::invalid_argument("ring_gcd: both arguments zero");
  if (!ring.is_local()) {
    // a | b must yield y = 0 so eliminations never touch the pivot row; raw
    // egcd can return (x=0, y=1) for |a| == |b|, turning combos into swaps
    if (!a.is_zero() && b.num % a.num == 0)
      return {Scalar(big_abs(a.num)), Scalar(a.num < 0 ? -1 : 1), Scalar(0)};
    Egcd e = egcd(a.num, b.num);
    return {Scalar(e.g), Scalar(e.x), Scalar(e.y)};
  }
  if (a.is_zero()) {
    auto [c, u] = canonical_associate(b, ring);
    return {c, Scalar(0), u};
  }
  if (b.is_zero()) {
    auto [c, u] = canonical_associate(a, ring);
    return {c, u, Scalar(0)};
  }
  long va = valuation(a, ring.prime);
  long vb = valuation(b, ring.prime);
  if (va <= vb) {
    Scalar g(big_pow(ring.prime, static_cast<unsigned long>(va)));
    return {g, g / a, Scalar(0)};
  }
  Scalar g(big_pow(ring.prime, static_cast<unsigned long>(vb)));
  return {g, Scalar(0), g / b};
}

inline void swap_rows(Matrix& m, int r1, int r2) {
  for (int j = 0; j < m.cols; ++j) std::swap(m.at(r1, j), m.at(r2, j));
}

inline void swap_cols(Matrix& m, int c1, int c2) {
  for (int i = 0; i < m.rows; ++i) std::swap(m.at(i, c1), m.at(i, c2));
}

inline void scale_row(Matrix& m, int r, const Scalar& s) {
  for (int j = 0; j < m.cols; ++j) m.at(r, j) *= s;
}

// row r1 <- x*r1 + y*r2, row r2 <- nb*r1 + ag*r2 (applied simultaneously)
inline void combo_rows(Matrix& m, int r1, int r2, const Scalar& x, const Scalar& y,
                       const Scalar& nb, const Scalar& ag) {
  for (int j = 0; j < m.cols; ++j) {
    Scalar v1 = m.at(r1, j), v2 = m.at(r2, j);
    m.at(r1, j) = x * v1 + y * v2;
    m.at(r2, j) = nb * v1 + ag * v2;
  }
}

inline void combo_cols(Matrix& m, int c1, int c2, const Scalar& x, const Scalar& y,
                       const Scalar& nb, const Scalar& ag) {
  for (int i = 0; i < m.rows; ++i) {
    Scalar v1 = m.at(i, c1), v2 = m.at(i, c2);
    m.at(i, c1) = x * v1 + y * v2;
    m.at(i, c2) = nb * v1 + ag * v2;
  }
}

// row r += f * row src
inline void row_axpy(Matrix& m, int r, int src, const Scalar& f) {
  for (int j = 0; j < m.cols; ++j) m.at(r, j) += f * m.at(src, j);
}

// col c += f * col src
inline void col_axpy(Matrix& m, int c, int src, const Scalar& f) {
  for (int i = 0; i < m.rows; ++i) m.at(i, c) += f * m.at(i, src);
}

// quotient for Euclidean descent: over Z rounds to nearest so the remainder
// is at most half the pivot; over Z_(p) exact once val(e) >= val(pivot)
inline Scalar euclid_quotient(const Scalar& e, const Scalar& pivot, const RingSpec& ring) {
  if (ring.is_local()) return e / pivot;
  BigInt q = floor_div(e.num, pivot.num);
  BigInt r = e.num - q * pivot.num;
  if (2 * big_abs(r) > big_abs(pivot.num)) q += ((pivot.num > 0) == (r > 0)) ? 1 : -1;
  return Scalar(q);
}

// q such that e - q*pivot is the canonical residue modulo the pivot
inline Scalar reduce_quotient(const Scalar& e, const Scalar& pivot, const RingSpec& ring) {
  if (!ring.is_local()) return Scalar(floor_div(e.num, pivot.num));
  long v = valuation(pivot, ring.prime);
  if (v == 0) return e / pivot;  // unit pivot, residue 0
  if (e.is_zero()) return Scalar(0);
  BigInt pv = big_pow(ring.prime, static_cast<unsigned long>(v));
  BigInt n = e.num % pv;
  if (n < 0) n += pv;
  BigInt r = (n * inv_mod(e.den % pv, pv)) % pv;
  return (e - Scalar(r)) / pivot;
}

// true when x is the canonical residue modulo the canonical pivot
inline bool residue_is_canonical(const Scalar& x, const Scalar& pivot, const RingSpec& ring) {
  if (!ring.is_local()) return x.is_integer() && x.num >= 0 && x.num < pivot.num;
  long v = valuation(pivot, ring.prime);
  if (v == 0) return x.is_zero();
  BigInt pv = big_pow(ring.prime, static_cast<unsigned long>(v));
  return x.is_integer() && x.num >= 0 && x.num < pv;
}

// pivot preference for snf: smaller canonical size first, deterministic
inline bool snf_smaller(const Scalar& a, const Scalar& b, const RingSpec& ring) {
  if (ring.is_local()) return valuation(a, ring.prime) < valuation(b, ring.prime);
  return big_abs(a.num) * b.den < big_abs(b.num) * a.den;
}

}  // namespace detail

struct HnfResult {
  Matrix h;                     // canonical form, h = u * m
  Matrix u;                     // invertible over the ring
  std::vector<int> pivot_cols;  // pivot column of each nonzero row
  int rank() const { return static_cast<int>(pivot_cols.size()); }
};

inline HnfResult hnf(const Matrix& m, const RingSpec& ring) {
  if (!entries_in_ring(m, ring))
    throw std::invalid_argument("hnf: entries not in " + ring.name());
  HnfResult res{m, Matrix::identity(m.rows), {}};
  Matrix& h = res.h;
  Matrix& u = res.u;
  int pr = 0;
  for (int c = 0; c < h.cols && pr < h.rows; ++c) {
    // Euclidean staircase: swap the smallest entry up, reduce the others by
    // nearest-quotient axpy, repeat; entries grow additively instead of the
    // multiplicative swell of one-shot 2x2 gcd combos
    bool have_pivot = false;
    for (;;) {
      int sel = -1;
      for (int r = pr; r < h.rows; ++r) {
        if (h.at(r, c).is_zero()) continue;
        if (sel < 0 || detail::snf_smaller(h.at(r, c), h.at(sel, c), ring)) sel = r;
      }
      if (sel < 0) break;
      have_pivot = true;
      if (sel != pr) {
        detail::swap_rows(h, pr, sel);
        detail::swap_rows(u, pr, sel);
      }
      bool cleared = true;
      for (int r = pr + 1; r < h.rows; ++r) {
        if (h.at(r, c).is_zero()) continue;
        Scalar q = detail::euclid_quotient(h.at(r, c), h.at(pr, c), ring);
        detail::row_axpy(h, r, pr, -q);
        detail::row_axpy(u, r, pr, -q);
        if (!h.at(r, c).is_zero()) cleared = false;
      }
      if (cleared) break;
    }
    if (!have_pivot) continue;
    auto [canon, unit] = canonical_associate(h.at(pr, c), ring);
    if (unit != Scalar(1)) {
      detail::scale_row(h, pr, unit);
      detail::scale_row(u, pr, unit);
    }
    for (int r = 0; r < pr; ++r) {
      Scalar q = detail::reduce_quotient(h.at(r, c), h.at(pr, c), ring);
      if (!q.is_zero()) {
        detail::row_axpy(h, r, pr, -q);
        detail::row_axpy(u, r, pr, -q);
      }
    }
    res.pivot_cols.push_back(c);
    ++pr;
  }
  return res;
}

// canonical-form predicate, usable as an independent replay check
inline bool hnf_is_canonical(const Matrix& h, const std::vector<int>& pivot_cols,
                             const RingSpec& ring) {
  int k = static_cast<int>(pivot_cols.size());
  if (k > h.rows) return false;
  for (int i = 0; i < k; ++i) {
    int c = pivot_cols[i];
    if (c < 0 || c >= h.cols) return false;
    if (i > 0 && pivot_cols[i - 1] >= c) return false;
    for (int j = 0; j < c; ++j)
      if (!h.at(i, j).is_zero()) return false;
    const Scalar& piv = h.at(i, c);
    if (piv.is_zero() || canonical_associate(piv, ring).first != piv) return false;
    for (int r = 0; r < i; ++r)
      if (!detail::residue_is_canonical(h.at(r, c), piv, ring)) return false;
  }
  for (int r = k; r < h.rows; ++r)
    for (int j = 0; j < h.cols; ++j)
      if (!h.at(r, j).is_zero()) return false;
  return true;
}

struct SnfResult {
  Matrix d;  // diagonal, d = u * m * v, divisibility chain, canonical entries
  Matrix u;
  Matrix v;
  int rank = 0;
};

inline SnfResult snf(const Matrix& m, const RingSpec& ring) {
  if (!entries_in_ring(m, ring))
    throw std::invalid_argument("snf: entries not in " + ring.name());
  SnfResult res{m, Matrix::identity(m.rows), Matrix::identity(m.cols), 0};
  Matrix& d = res.d;
  Matrix& u = res.u;
  Matrix& v = res.v;
  const int nmin = std::min(d.rows, d.cols);
  int t = 0;
  while (t < nmin) {
    int pi = -1, pj = -1;
    for (int i = t; i < d.rows; ++i)
      for (int j = t; j < d.cols; ++j) {
        if (d.at(i, j).is_zero()) continue;
        if (pi < 0 || detail::snf_smaller(d.at(i, j), d.at(pi, pj), ring)) {
          pi = i;
          pj = j;
        }
      }
    if (pi < 0) break;
    if (pi != t) {
      detail::swap_rows(d, t, pi);
      detail::swap_rows(u, t, pi);
    }
    if (pj != t) {
      detail::swap_cols(d, t, pj);
      detail::swap_cols(v, t, pj);
    }
    // clear row and column t by Euclidean staircases (nearest-quotient axpy
    // plus swaps); column swaps in the row stage can refill the column, but
    // each refill comes with a strictly smaller pivot, so this terminates
    for (int guard = 0;; ++guard) {
      if (guard > 4096) throw InternalInvariantViolation("snf: clearing does not converge");
      for (;;) {
        int sel = t;
        for (int r = t + 1; r < d.rows; ++r) {
          if (d.at(r, t).is_zero()) continue;
          if (detail::snf_smaller(d.at(r, t), d.at(sel, t), ring)) sel = r;
        }
        if (sel != t) {
          detail::swap_rows(d, t, sel);
          detail::swap_rows(u, t, sel);
        }
        bool cleared = true;
        for (int r = t + 1; r < d.rows; ++r) {
          if (d.at(r, t).is_zero()) continue;
          Scalar q = detail::euclid_quotient(d.at(r, t), d.at(t, t), ring);
          detail::row_axpy(d, r, t, -q);
          detail::row_axpy(u, r, t, -q);
          if (!d.at(r, t).is_zero()) cleared = false;
        }
        if (cleared) break;
      }
      for (;;) {
        int sel = t;
        for (int c = t + 1; c < d.cols; ++c) {
          if (d.at(t, c).is_zero()) continue;
          if (detail::snf_smaller(d.at(t, c), d.at(t, sel), ring)) sel = c;
        }
        if (sel != t) {
          detail::swap_cols(d, t, sel);
          detail::swap_cols(v, t, sel);
        }
        bool cleared = true;
        for (int c = t + 1; c < d.cols; ++c) {
          if (d.at(t, c).is_zero()) continue;
          Scalar q = detail::euclid_quotient(d.at(t, c), d.at(t, t), ring);
          detail::col_axpy(d, c, t, -q);
          detail::col_axpy(v, c, t, -q);
          if (!d.at(t, c).is_zero()) cleared = false;
        }
        if (cleared) break;
      }
      bool dirty = false;
      for (int r = t + 1; r < d.rows && !dirty; ++r) dirty = !d.at(r, t).is_zero();
      if (!dirty) break;
    }
    ++t;
  }
  res.rank = t;
  // divisibility chain: replace (a, b) by (gcd, lcm) until sorted
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i + 1 < res.rank; ++i) {
      Scalar a = d.at(i, i), b = d.at(i + 1, i + 1);
      if (divides(a, b, ring)) continue;
      changed = true;
      detail::col_axpy(d, i, i + 1, Scalar(1));
      detail::col_axpy(v, i, i + 1, Scalar(1));
      auto gc = detail::ring_gcd(d.at(i, i), d.at(i + 1, i), ring);
      Scalar nb = -(d.at(i + 1, i) / gc.g), ag = d.at(i, i) / gc.g;
      detail::combo_rows(d, i, i + 1, gc.x, gc.y, nb, ag);
      detail::combo_rows(u, i, i + 1, gc.x, gc.y, nb, ag);
      Scalar f = d.at(i, i + 1) / d.at(i, i);
      detail::col_axpy(d, i + 1, i, -f);
      detail::col_axpy(v, i + 1, i, -f);
    }
  }
  for (int i = 0; i < res.rank; ++i) {
    auto [canon, unit] = canonical_associate(d.at(i, i), ring);
    if (unit != Scalar(1)) {
      detail::scale_row(d, i, unit);
      detail::scale_row(u, i, unit);
    }
  }
  return res;
}

// nonzero diagonal of the Smith form, in chain order
inline std::vector<Scalar> invariant_factors(const Matrix& m, const RingSpec& ring) {
  auto s = snf(m, ring);
  std::vector<Scalar> out;
  out.reserve(static_cast<size_t>(s.rank));
  for (int i = 0; i < s.rank; ++i) out.push_back(s.d.at(i, i));
  return out;
}

inline bool all_units(const std::vector<Scalar>& fs, const RingSpec& ring) {
  for (const auto& f : fs)
    if (!is_unit(f, ring)) return false;
  return true;
}

// canonical column echelon basis of the column span; drops dependent columns
// only in rank, callers needing saturation certify separately
inline Matrix col_hnf(const Matrix& m, const RingSpec& ring) {
  auto ht = hnf(m.transpose(), ring);
  return ht.h.sub_rows(0, ht.rank()).transpose();
}

// Saturated sublattice of R^ambient spanned by the columns of basis, stored
// in canonical column form so equal lattices have equal bases.
struct Lattice {
  int ambient = 0;
  Matrix basis;  // ambient x rank, canonical

  int rank() const { return basis.cols; }

  bool operator==(const Lattice&) const = default;
};

inline bool lattice_equal(const Lattice& a, const Lattice& b) { return a == b; }

// Kernel of m as a saturated lattice in R^cols. The rows of u aligned with
// the zero rows of hnf(m^T) form a basis of the kernel, and that basis is a
// direct summand; saturation is certified via invariant factors anyway.
inline Lattice kernel_saturated(const Matrix& m, const RingSpec& ring) {
  auto ht = hnf(m.transpose(), ring);
  int rk = ht.rank();
  Matrix basis = ht.u.sub_rows(rk, m.cols - rk).transpose();
  basis = col_hnf(basis, ring);
  if (basis.cols != m.cols - rk)
    throw InternalInvariantViolation("kernel_saturated: basis rank mismatch");
  if (!(m * basis).is_zero())
    throw InternalInvariantViolation("kernel_saturated: basis does not annihilate");
  auto inv = invariant_factors(basis, ring);
  if (static_cast<int>(inv.size()) != basis.cols || !all_units(inv, ring))
    throw InternalInvariantViolation("kernel_saturated: kernel basis is not saturated");
  return Lattice{m.cols, basis};
}

// coordinates of the columns of vs in L, when all lie in the R-span
inline std::optional<Matrix> membership_all(const Matrix& vs, const Lattice& L,
                                            const RingSpec& ring) {
  if (vs.rows != L.ambient) throw std::invalid_argument("membership: ambient mismatch");
  if (L.rank() == 0) {
    if (!vs.is_zero()) return std::nullopt;
    return Matrix(0, vs.cols);
  }
  auto c = solve_exact(L.basis, vs);
  if (!c || !entries_in_ring(*c, ring)) return std::nullopt;
  if (!(L.basis * *c == vs))
    throw InternalInvariantViolation("membership: replay failed");
  return c;
}

inline std::optional<Matrix> membership(const Matrix& v, const Lattice& L,
                                        const RingSpec& ring) {
  if (v.cols != 1) throw std::invalid_argument("membership: column vector expected");
  return membership_all(v, L, ring);
}

struct Splitting {
  Matrix retraction;  // rank x ambient: retraction * basis = I, retraction * complement = 0
  Matrix complement;  // ambient x (ambient - rank): [basis | complement] invertible over R
  Matrix projection;  // (ambient - rank) x ambient: projection * complement = I
};

// Splits a saturated inclusion L -> R^ambient. Throws NotSaturatedError when
// some invariant factor of the basis is not a unit (or columns are
// dependent); then no retraction exists.
inline Splitting split_saturated_inclusion(const Lattice& L, const RingSpec& ring) {
  const int n = L.ambient, k = L.rank();
  if (L.basis.rows != n) throw std::invalid_argument("split: basis shape mismatch");
  if (!entries_in_ring(L.basis, ring))
    throw std::invalid_argument("split: basis entries not in " + ring.name());
  auto s = snf(L.basis, ring);
  if (s.rank < k) throw NotSaturatedError("split: basis columns are dependent");
  for (int i = 0; i < k; ++i)
    if (!is_unit(s.d.at(i, i), ring))
      throw NotSaturatedError("split: invariant factor " + s.d.at(i, i).str() +
                              " is not a unit in " + ring.name());
  auto uinv = inverse_exact(s.u);
  if (!uinv) throw InternalInvariantViolation("split: snf transform not invertible");
  Matrix complement = uinv->sub_cols(k, n - k);
  Matrix w = hstack(L.basis, complement);
  auto winv = inverse_exact(w);
  if (!winv || !entries_in_ring(*winv, ring))
    throw InternalInvariantViolation("split: completed basis not invertible over the ring");
  Splitting out{winv->sub_rows(0, k), complement, winv->sub_rows(k, n - k)};
  if (!(out.retraction * L.basis).is_identity())
    throw InternalInvariantViolation("split: retraction replay failed");
  return out;
}

// right inverse over the ring, when m is surjective as a map of free modules
inline std::optional<Matrix> right_inverse(const Matrix& m, const RingSpec& ring) {
  auto s = snf(m, ring);
  if (s.rank < m.rows) return std::nullopt;
  for (int i = 0; i < s.rank; ++i)
    if (!is_unit(s.d.at(i, i), ring)) return std::nullopt;
  Matrix core(m.cols, m.rows);
  for (int i = 0; i < s.rank; ++i) core.at(i, i) = Scalar(1) / s.d.at(i, i);
  Matrix x = s.v * core * s.u;
  if (!(m * x).is_identity())
    throw InternalInvariantViolation("right_inverse: replay failed");
  return x;
}

}  // namespace kwitness
