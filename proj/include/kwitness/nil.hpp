#pragma once

// Valid multicomplexes equipped with a commuting nilpotent endomorphism, the
// kernel filtration by powers of the endomorphism, and the split exact
// filtration layer used by the reduction driver. Splitting can genuinely
// fail (the sub or quotient complex may lose per-line acyclicity); that
// outcome is a first-class result, not an exception. Conditions guaranteed
// by commutation alone (closure of kernels under differentials, saturation
// of kernel lattices, freeness of quotients) are enforced with
// InternalInvariantViolation instead.

#include "kwitness/corpus.hpp"
#include "kwitness/linalg.hpp"
#include "kwitness/matrix.hpp"
#include "kwitness/multicomplex.hpp"
#include "kwitness/ring.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kwitness {

struct NotNilpotentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NilMulticomplex {
  BinaryMulticomplex base;
  std::map<MultiIndex, Matrix> nil;  // only nonzero endomorphisms

  bool operator==(const NilMulticomplex&) const = default;

  Matrix nil_at(const MultiIndex& x) const {
    auto it = nil.find(x);
    if (it != nil.end()) return it->second;
    int r = base.rank_at(x);
    return Matrix(r, r);
  }

  void set_nil(const MultiIndex& x, const Matrix& m) {
    if (m.rows == 0 || m.cols == 0 || m.is_zero())
      nil.erase(x);
    else
      nil[x] = m;
  }

  bool nil_is_zero() const { return nil.empty(); }

  NilMulticomplex with_zero_nil() const { return NilMulticomplex{base, {}}; }
};

inline NilMulticomplex nil_single(const RingSpec& ring, const Matrix& nu) {
  if (nu.rows != nu.cols) throw std::invalid_argument("nil_single: square matrix expected");
  NilMulticomplex n;
  n.base.ring = ring;
  n.base.dimension = 0;
  n.base.set_rank({}, nu.rows);
  n.set_nil({}, nu);
  return n;
}

// direct sum of two copies of c with the endomorphism mapping the second
// copy identically onto the first; nilpotent of index 2 wherever rank > 0
inline NilMulticomplex shift_nil(const BinaryMulticomplex& c) {
  NilMulticomplex n;
  n.base = direct_sum(c, c);
  for (const auto& [x, r] : c.ranks) {
    Matrix m(2 * r, 2 * r);
    for (int i = 0; i < r; ++i) m.at(i, r + i) = Scalar(1);
    n.set_nil(x, m);
  }
  return n;
}

// base validity plus: square ring-entry endomorphisms, commutation with both
// members of every differential, nilpotency at every position
inline ValidationReport validate_nil(const NilMulticomplex& n) {
  ValidationReport rep = validate_multicomplex(n.base);
  if (!rep.pass) return rep;
  bool shape_ok = true;
  for (const auto& [x, m] : n.nil) {
    int r = n.base.rank_at(x);
    if (static_cast<int>(x.size()) != n.base.dimension) {
      rep.add(FailKind::NilShape, "endomorphism at invalid position " + pos_str(x));
      shape_ok = false;
      continue;
    }
    if (m.rows != r || m.cols != r) {
      rep.add(FailKind::NilShape, "endomorphism at " + pos_str(x) + " has shape " +
                                      std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                                      ", expected " + std::to_string(r) + "x" +
                                      std::to_string(r));
      shape_ok = false;
    }
    if (!entries_in_ring(m, n.base.ring)) {
      rep.add(FailKind::NilShape,
              "endomorphism entries not in " + n.base.ring.name() + " at " + pos_str(x));
      shape_ok = false;
    }
  }
  if (!shape_ok) return rep;
  for (int dir = 1; dir <= n.base.dimension; ++dir)
    for (int mem = 0; mem < 2; ++mem)
      for (const auto& x : n.base.positions()) {
        if (x[static_cast<size_t>(dir - 1)] < 1) continue;
        Matrix d = n.base.diff_at(dir, static_cast<Member>(mem), x);
        if (!(n.nil_at(step_down(x, dir)) * d == d * n.nil_at(x)))
          rep.add(FailKind::NilCommutation,
                  "endomorphism does not commute with " +
                      std::string(member_name(static_cast<Member>(mem))) + "^" +
                      std::to_string(dir) + " at " + pos_str(x));
      }
  for (const auto& x : n.base.positions()) {
    int r = n.base.rank_at(x);
    if (r == 0) continue;
    if (!matrix_pow(n.nil_at(x), static_cast<unsigned long>(r)).is_zero())
      rep.add(FailKind::NilNilpotency,
              "endomorphism at " + pos_str(x) + " is not nilpotent");
  }
  return rep;
}

struct NilIndexData {
  int max_index = 0;  // 0 only when every position has rank 0
  int min_index = 0;  // minimum over positions of positive rank
  std::map<MultiIndex, int> local;
};

// local index: 0 on rank-0 positions, 1 for the zero map on positive rank,
// otherwise the least m with nu^m = 0
inline NilIndexData nil_index(const NilMulticomplex& n) {
  NilIndexData out;
  bool any = false;
  for (const auto& x : n.base.positions()) {
    int r = n.base.rank_at(x);
    if (r == 0) {
      out.local[x] = 0;
      continue;
    }
    Matrix nu = n.nil_at(x);
    Matrix pow = Matrix::identity(r);
    int m = 0;
    while (m <= r) {
      if (pow.is_zero()) break;
      pow = pow * nu;
      ++m;
    }
    if (!pow.is_zero())
      throw NotNilpotentError("nil_index: endomorphism at " + pos_str(x) + " is not nilpotent");
    out.local[x] = m;
    out.max_index = std::max(out.max_index, m);
    out.min_index = any ? std::min(out.min_index, m) : m;
    any = true;
  }
  if (!any) out.min_index = 0;
  return out;
}

struct Filtration {
  int max_index = 0;
  // layers[x][i] = saturated kernel of nu_x^(i+1), i = 0 .. max_index-1
  std::map<MultiIndex, std::vector<Lattice>> layers;
};

// kernel filtration by powers of the endomorphism, with every structural
// property (chain inclusion, top = everything, differentials and the
// endomorphism respect the layers, free quotients) verified on the spot
inline Filtration kernel_filtration(const NilMulticomplex& n) {
  Filtration out;
  out.max_index = nil_index(n).max_index;
  const RingSpec& ring = n.base.ring;
  for (const auto& x : n.base.positions()) {
    int r = n.base.rank_at(x);
    Matrix nu = n.nil_at(x);
    std::vector<Lattice> chain;
    Matrix pow = Matrix::identity(r);
    for (int i = 1; i <= out.max_index; ++i) {
      pow = pow * nu;
      chain.push_back(kernel_saturated(pow, ring));
    }
    if (out.max_index > 0 && chain.back().rank() != r)
      throw InternalInvariantViolation("kernel_filtration: top layer at " + pos_str(x) +
                                       " is not everything");
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
      auto coords = membership_all(chain[i].basis, chain[i + 1], ring);
      if (!coords)
        throw InternalInvariantViolation("kernel_filtration: layer " + std::to_string(i + 1) +
                                         " not contained in layer " + std::to_string(i + 2) +
                                         " at " + pos_str(x));
      auto inv = invariant_factors(*coords, ring);
      if (static_cast<int>(inv.size()) != chain[i].rank() || !all_units(inv, ring))
        throw InternalInvariantViolation("kernel_filtration: layer quotient not free at " +
                                         pos_str(x));
    }
    for (size_t i = 0; i < chain.size(); ++i) {
      Matrix image = nu * chain[i].basis;
      if (i == 0) {
        if (!image.is_zero())
          throw InternalInvariantViolation(
              "kernel_filtration: endomorphism does not kill the first layer at " + pos_str(x));
      } else if (!membership_all(image, chain[i - 1], ring)) {
        throw InternalInvariantViolation(
            "kernel_filtration: endomorphism does not shift the filtration at " + pos_str(x));
      }
    }
    out.layers[x] = std::move(chain);
  }
  // differentials respect the filtration levelwise
  for (int i = 0; i < out.max_index; ++i)
    for (int dir = 1; dir <= n.base.dimension; ++dir)
      for (int mem = 0; mem < 2; ++mem)
        for (const auto& x : n.base.positions()) {
          if (x[static_cast<size_t>(dir - 1)] < 1) continue;
          Matrix d = n.base.diff_at(dir, static_cast<Member>(mem), x);
          const Lattice& src = out.layers.at(x)[static_cast<size_t>(i)];
          const Lattice& dst = out.layers.at(step_down(x, dir))[static_cast<size_t>(i)];
          if (!membership_all(d * src.basis, dst, ring))
            throw InternalInvariantViolation(
                "kernel_filtration: differential does not respect layer " + std::to_string(i + 1) +
                " at " + pos_str(x));
        }
  return out;
}

enum class SplitStrategy { MaxIndex, PaperMinIndex };

inline const char* strategy_name(SplitStrategy s) {
  return s == SplitStrategy::MaxIndex ? "max-index" : "paper-min-index";
}

inline SplitStrategy strategy_from_name(const std::string& s) {
  if (s == "max-index") return SplitStrategy::MaxIndex;
  if (s == "paper-min-index") return SplitStrategy::PaperMinIndex;
  throw std::invalid_argument("unknown strategy: " + s);
}

// a side condition of the layer construction failed; carries enough to
// reproduce and audit the failure
struct SplitFailure {
  SplitStrategy strategy = SplitStrategy::MaxIndex;
  int exponent = 0;
  std::string where;  // "exponent", "sub" or "quotient"
  std::vector<ValidationFailure> details;

  std::string summary() const {
    std::string s = std::string(strategy_name(strategy)) + " split failed (" + where +
                    ", exponent " + std::to_string(exponent) + ")";
    if (!details.empty()) s += ": " + details.front().detail;
    return s;
  }
};

struct FiltrationLayer {
  int exponent = 0;
  NilMulticomplex sub;       // kernel of nu^exponent with induced structure
  NilMulticomplex quotient;  // complementary structure; zero endomorphism
                             // under the max-index strategy
  std::map<MultiIndex, Lattice> kernels;
  std::map<MultiIndex, Splitting> splittings;
};

// Splits off the kernel of nu^e as a levelwise direct summand. e is
// max_index-1 under MaxIndex and min_index-1 under PaperMinIndex; the caller
// must not invoke this on endomorphisms of index < 2.
inline std::variant<FiltrationLayer, SplitFailure> layer_split(const NilMulticomplex& n,
                                                               SplitStrategy strategy) {
  NilIndexData idx = nil_index(n);
  if (idx.max_index < 2)
    throw std::invalid_argument("layer_split: nilpotency index below 2");
  const RingSpec& ring = n.base.ring;
  int e = (strategy == SplitStrategy::MaxIndex ? idx.max_index : idx.min_index) - 1;
  if (e == 0) {
    // some positive-rank position carries the zero endomorphism; the
    // adjusted kernel row is vacuous and makes no index progress
    return SplitFailure{strategy, 0, "exponent",
                        {{FailKind::Acyclicity,
                          "degenerate exponent 0: a position of positive rank has local "
                          "nilpotency index 1"}}};
  }

  FiltrationLayer layer;
  layer.exponent = e;
  layer.sub.base.ring = ring;
  layer.sub.base.dimension = n.base.dimension;
  layer.quotient.base.ring = ring;
  layer.quotient.base.dimension = n.base.dimension;

  for (const auto& x : n.base.positions()) {
    Matrix nu = n.nil_at(x);
    layer.kernels[x] = kernel_saturated(matrix_pow(nu, static_cast<unsigned long>(e)), ring);
    const Lattice& k = layer.kernels.at(x);
    layer.sub.base.set_rank(x, k.rank());
    layer.quotient.base.set_rank(x, n.base.rank_at(x) - k.rank());
    auto spl = [&]() -> Splitting {
      try {
        return split_saturated_inclusion(k, ring);
      } catch (const NotSaturatedError& err) {
        throw InternalInvariantViolation(std::string("layer_split: kernel not saturated: ") +
                                         err.what());
      }
    }();
    layer.splittings[x] = std::move(spl);
    // induced endomorphism on the kernel: nu restricts because it commutes
    // with its own powers
    auto nu_sub = membership_all(nu * k.basis, k, ring);
    if (!nu_sub)
      throw InternalInvariantViolation("layer_split: endomorphism does not preserve its kernel at " +
                                       pos_str(x));
    layer.sub.set_nil(x, *nu_sub);
    const Splitting& s = layer.splittings.at(x);
    layer.quotient.set_nil(x, s.projection * nu * s.complement);
  }

  for (const auto& [key, mat] : n.base.diffs) {
    const auto& [dir, mem, x] = key;
    MultiIndex y = step_down(x, dir);
    // closure of the kernel under every differential is forced by
    // cross-commutation with the endomorphism
    auto d_sub = membership_all(mat * layer.kernels.at(x).basis, layer.kernels.at(y), ring);
    if (!d_sub)
      throw InternalInvariantViolation("layer_split: kernel not closed under " +
                                       std::string(member_name(static_cast<Member>(mem))) + "^" +
                                       std::to_string(dir) + " at " + pos_str(x));
    layer.sub.base.set_diff(dir, static_cast<Member>(mem), x, *d_sub);
    layer.quotient.base.set_diff(
        dir, static_cast<Member>(mem), x,
        layer.splittings.at(y).projection * mat * layer.splittings.at(x).complement);
  }

  if (strategy == SplitStrategy::MaxIndex && !layer.quotient.nil_is_zero())
    throw InternalInvariantViolation(
        "layer_split: quotient endomorphism nonzero under max-index strategy");

  // the audited side conditions: the induced sub and quotient must again be
  // valid; only per-line acyclicity can actually fail here
  for (const char* side : {"sub", "quotient"}) {
    const NilMulticomplex& m = side == std::string("sub") ? layer.sub : layer.quotient;
    ValidationReport rep = validate_nil(m);
    if (rep.pass) continue;
    for (const auto& f : rep.failures)
      if (f.kind != FailKind::Acyclicity)
        throw InternalInvariantViolation(std::string("layer_split: ") + side + " broke a " +
                                         fail_kind_name(f.kind) + " invariant: " + f.detail);
    return SplitFailure{strategy, e, side, rep.failures};
  }
  return layer;
}

// Nilpotent elements of the commutant of the differentials, sampled from the
// saturated solution lattice of the commutation equations. Deterministic in
// the seed; includes the zero endomorphism; returns at most `trials` samples.
inline std::vector<NilMulticomplex> commutant_nilpotent_sample(const BinaryMulticomplex& c,
                                                               uint64_t seed, int trials) {
  std::vector<NilMulticomplex> out;
  if (trials <= 0) return out;
  out.push_back(NilMulticomplex{c, {}});

  // unknown vector: entries of nu_x, row-major, positions in map order
  std::vector<MultiIndex> pos;
  std::map<MultiIndex, int> offset;
  int total = 0;
  for (const auto& [x, r] : c.ranks) {
    pos.push_back(x);
    offset[x] = total;
    total += r * r;
  }
  if (total == 0) return out;

  std::vector<std::vector<Scalar>> rows;
  for (const auto& [key, mat] : c.diffs) {
    const auto& [dir, mem, x] = key;
    (void)mem;
    MultiIndex y = step_down(x, dir);
    int rx = c.rank_at(x), ry = c.rank_at(y);
    // nu_y * d - d * nu_x = 0, one equation per target entry (a, b)
    for (int a = 0; a < ry; ++a)
      for (int b = 0; b < rx; ++b) {
        std::vector<Scalar> row(static_cast<size_t>(total));
        for (int t = 0; t < ry; ++t)
          row[static_cast<size_t>(offset.at(y) + a * ry + t)] += mat.at(t, b);
        for (int t = 0; t < rx; ++t)
          row[static_cast<size_t>(offset.at(x) + t * rx + b)] -= mat.at(a, t);
        rows.push_back(std::move(row));
      }
  }
  Matrix a(static_cast<int>(rows.size()), total);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < total; ++j) a.at(static_cast<int>(i), j) = rows[i][static_cast<size_t>(j)];
  Lattice sol = kernel_saturated(a, c.ring);

  auto unpack = [&](const Matrix& vec) {
    NilMulticomplex n{c, {}};
    for (const auto& x : pos) {
      int r = c.rank_at(x);
      Matrix m(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) m.at(i, j) = vec.at(offset.at(x) + i * r + j, 0);
      if (!matrix_pow(m, static_cast<unsigned long>(r)).is_zero()) return std::optional<NilMulticomplex>();
      n.set_nil(x, m);
    }
    return std::optional<NilMulticomplex>(std::move(n));
  };

  auto try_add = [&](const Matrix& vec) {
    if (static_cast<int>(out.size()) >= trials) return;
    auto cand = unpack(vec);
    if (!cand) return;
    for (const auto& seen : out)
      if (seen == *cand) return;
    out.push_back(std::move(*cand));
  };

  for (int j = 0; j < sol.rank() && static_cast<int>(out.size()) < trials; ++j) {
    try_add(sol.basis.column(j));
    try_add(Scalar(-1) * sol.basis.column(j));
  }
  Rng rng(derive_seed(seed, 0x636f6d6dull));
  for (int t = 0; t < 4 * trials && static_cast<int>(out.size()) < trials; ++t) {
    Matrix vec(total, 1);
    for (int j = 0; j < sol.rank(); ++j) {
      Scalar cft(rng.uniform(-2, 2));
      if (!cft.is_zero()) vec = vec + cft * sol.basis.column(j);
    }
    if (!vec.is_zero()) try_add(vec);
  }
  return out;
}

}  // namespace kwitness
