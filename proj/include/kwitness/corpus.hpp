#pragma once

// Deterministic instance generation. All randomness flows through a
// splitmix64 generator so corpora are identical across platforms and runs;
// per-sample streams are derived from (seed, index).

#include "kwitness/linalg.hpp"
#include "kwitness/matrix.hpp"
#include "kwitness/multicomplex.hpp"
#include "kwitness/ring.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace kwitness {

struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // inclusive bounds; modulo bias is irrelevant at corpus scale
  long uniform(long lo, long hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniform: empty range");
    return lo + static_cast<long>(next() % static_cast<uint64_t>(hi - lo + 1));
  }

  bool coin() { return (next() & 1) != 0; }
};

inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  Rng r(seed ^ ((index + 1) * 0x9e3779b97f4a7c15ull));
  return r.next();
}

// product of elementary row operations: det = +-1, integer entries, so the
// result is invertible over Z and over every localization
inline Matrix random_unimodular(Rng& rng, int n, int ops = -1, long coeff_bound = 2) {
  if (ops < 0) ops = n + 1;
  Matrix m = Matrix::identity(n);
  if (n < 2) return m;
  for (int s = 0; s < ops; ++s) {
    int i = static_cast<int>(rng.uniform(0, n - 1));
    int j = static_cast<int>(rng.uniform(0, n - 2));
    if (j >= i) ++j;
    long c = rng.uniform(1, coeff_bound) * (rng.coin() ? 1 : -1);
    for (int k = 0; k < n; ++k) m.at(i, k) += Scalar(c) * m.at(j, k);
    if (rng.uniform(0, 3) == 0) {
      for (int k = 0; k < n; ++k) m.at(i, k) = -m.at(i, k);
    }
  }
  return m;
}

// conjugated strictly upper triangular matrix; retries until the entry bound
// holds, falling back to the un-conjugated triangle
inline Matrix random_nilpotent(Rng& rng, int n, const RingSpec& ring, long entry_bound = 9) {
  Matrix t(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t.at(i, j) = Scalar(rng.uniform(-3, 3));
  if (ring.is_local() && rng.uniform(0, 3) == 0) {
    // exercise non-integer ring elements: divide by a small prime != p
    long q = 2;
    while (BigInt(q) == ring.prime) ++q;
    for (auto& s : t.e) s = s / Scalar(q);
  }
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix u = random_unimodular(rng, n);
    auto uinv = inverse_exact(u);
    Matrix cand = u * t * *uinv;
    bool ok = true;
    for (const auto& s : cand.e)
      if (big_abs(s.num) > entry_bound) {
        ok = false;
        break;
      }
    if (ok) return cand;
  }
  return t;
}

// Random valid binary multicomplex on [0,2]^dimension. Built from elementary
// boxes (rank-k windows whose differentials are identities, with at most one
// direction's second member twisted by a unimodular identification), summed,
// then conjugated by a random change of basis at every position.
inline BinaryMulticomplex random_acyclic_binary(uint64_t seed, int dimension, int rank_bound,
                                                long entry_bound, const RingSpec& ring) {
  if (dimension < 0 || dimension > 2)
    throw std::invalid_argument("random_acyclic_binary: dimension must be 0, 1 or 2");
  if (rank_bound < 1) throw std::invalid_argument("random_acyclic_binary: rank_bound < 1");
  Rng rng(seed);
  BinaryMulticomplex acc;
  acc.ring = ring;
  acc.dimension = dimension;
  if (dimension == 0) {
    acc.set_rank({}, static_cast<int>(rng.uniform(1, rank_bound)));
    return acc;
  }
  int boxes = static_cast<int>(rng.uniform(1, 2));
  for (int b = 0; b < boxes; ++b) {
    int k = static_cast<int>(rng.uniform(1, rank_bound));
    std::vector<int> lo(static_cast<size_t>(dimension));
    for (auto& l : lo) l = static_cast<int>(rng.uniform(0, 1));
    int twist_dir = static_cast<int>(rng.uniform(0, dimension));  // 0 = none
    Matrix w = random_unimodular(rng, k, k + 1, entry_bound);
    BinaryMulticomplex box;
    box.ring = ring;
    box.dimension = dimension;
    for (int corner = 0; corner < (1 << dimension); ++corner) {
      MultiIndex x(static_cast<size_t>(dimension));
      for (int i = 0; i < dimension; ++i)
        x[static_cast<size_t>(i)] = lo[static_cast<size_t>(i)] + ((corner >> i) & 1);
      box.set_rank(x, k);
      for (int i = 0; i < dimension; ++i) {
        if (((corner >> i) & 1) == 0) continue;
        box.set_diff(i + 1, Member::D, x, Matrix::identity(k));
        box.set_diff(i + 1, Member::DTilde, x, (i + 1 == twist_dir) ? w : Matrix::identity(k));
      }
    }
    acc = direct_sum(acc, box);
  }
  // change of basis per position
  std::map<MultiIndex, Matrix> p, pinv;
  for (const auto& x : acc.positions()) {
    int r = acc.rank_at(x);
    if (r == 0) continue;
    Matrix px = random_unimodular(rng, r, r + 1, entry_bound);
    pinv[x] = *inverse_exact(px);
    p[x] = std::move(px);
  }
  BinaryMulticomplex out;
  out.ring = ring;
  out.dimension = dimension;
  out.ranks = acc.ranks;
  for (const auto& [key, mat] : acc.diffs) {
    const auto& [dir, mem, x] = key;
    MultiIndex y = step_down(x, dir);
    Matrix m = mat;
    if (p.count(y)) m = p.at(y) * m;
    if (pinv.count(x)) m = m * pinv.at(x);
    out.set_diff(dir, static_cast<Member>(mem), x, m);
  }
  auto rep = validate_multicomplex(out);
  if (!rep.pass)
    throw InternalInvariantViolation("random_acyclic_binary: generated complex invalid: " +
                                     rep.summary());
  return out;
}

}  // namespace kwitness
