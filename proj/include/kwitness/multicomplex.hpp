#pragma once

// Binary multicomplexes supported on [0,2]^n: each direction carries a pair
// of commuting squared-zero differentials, and validity additionally demands
// per-line acyclicity of both members, witnessed by replayable data (kernel
// lattice, image coordinates, right inverse).
//
// Positions are multi-indices in {0,1,2}^n; a differential in direction i at
// position x maps the module at x to the module at x - e_i. Storage is
// sparse: absent ranks are zero, absent matrices are zero maps of the shapes
// implied by the ranks.

#include "kwitness/linalg.hpp"
#include "kwitness/matrix.hpp"
#include "kwitness/ring.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace kwitness {

using MultiIndex = std::vector<int>;

enum class Member { D = 0, DTilde = 1 };

inline const char* member_name(Member m) { return m == Member::D ? "d" : "dTilde"; }

inline std::string pos_str(const MultiIndex& x) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

// all of {0,1,2}^n in lexicographic order
inline std::vector<MultiIndex> all_positions(int dimension) {
  std::vector<MultiIndex> out;
  MultiIndex x(static_cast<size_t>(dimension), 0);
  for (;;) {
    out.push_back(x);
    int k = dimension - 1;
    while (k >= 0 && x[static_cast<size_t>(k)] == 2) x[static_cast<size_t>(k--)] = 0;
    if (k < 0) break;
    ++x[static_cast<size_t>(k)];
  }
  return out;
}

inline MultiIndex step_down(MultiIndex x, int direction) {
  --x[static_cast<size_t>(direction - 1)];
  return x;
}

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class FailKind {
  Shape,
  Composite,
  Commutation,
  Acyclicity,
  NilShape,
  NilCommutation,
  NilNilpotency,
};

inline const char* fail_kind_name(FailKind k) {
  switch (k) {
    case FailKind::Shape: return "shape";
    case FailKind::Composite: return "composite";
    case FailKind::Commutation: return "commutation";
    case FailKind::Acyclicity: return "acyclicity";
    case FailKind::NilShape: return "nil-shape";
    case FailKind::NilCommutation: return "nil-commutation";
    case FailKind::NilNilpotency: return "nil-nilpotency";
  }
  return "?";
}

struct ValidationFailure {
  FailKind kind;
  std::string detail;
};

// direction, member index, base position (coordinate in that direction = 0)
using LineKey = std::tuple<int, int, MultiIndex>;

// replayable exactness data for one line of one member:
//   z1 = saturated kernel of the degree-1 map,
//   im_coords: degree-2 map's columns in z1 coordinates, unit invariant factors,
//   right_inv: right inverse of the degree-1 map over the ring
struct AcyclicityWitness {
  Lattice z1;
  Matrix im_coords;
  Matrix right_inv;
};

struct ValidationReport {
  bool pass = true;
  std::vector<ValidationFailure> failures;
  std::map<LineKey, AcyclicityWitness> witnesses;

  void add(FailKind kind, std::string detail) {
    pass = false;
    failures.push_back({kind, std::move(detail)});
  }

  bool has_kind(FailKind k) const {
    for (const auto& f : failures)
      if (f.kind == k) return true;
    return false;
  }

  std::string summary() const {
    if (pass) return "ok";
    return std::string(fail_kind_name(failures.front().kind)) + ": " + failures.front().detail;
  }
};

struct ValidationError : std::runtime_error {
  ValidationReport report;
  explicit ValidationError(ValidationReport r)
      : std::runtime_error("validation failed: " + r.summary()), report(std::move(r)) {}
};

struct BinaryMulticomplex {
  RingSpec ring;
  int dimension = 0;
  std::map<MultiIndex, int> ranks;                             // only positive entries
  std::map<std::tuple<int, int, MultiIndex>, Matrix> diffs;    // only nonzero matrices

  bool operator==(const BinaryMulticomplex&) const = default;

  int rank_at(const MultiIndex& x) const {
    auto it = ranks.find(x);
    return it == ranks.end() ? 0 : it->second;
  }

  void set_rank(const MultiIndex& x, int r) {
    if (r < 0) throw std::invalid_argument("set_rank: negative rank");
    if (r == 0)
      ranks.erase(x);
    else
      ranks[x] = r;
  }

  // shape implied by the ranks; direction is 1-based, x[direction-1] >= 1
  Matrix diff_at(int direction, Member m, const MultiIndex& x) const {
    auto it = diffs.find({direction, static_cast<int>(m), x});
    if (it != diffs.end()) return it->second;
    return Matrix(rank_at(step_down(x, direction)), rank_at(x));
  }

  void set_diff(int direction, Member m, const MultiIndex& x, const Matrix& mat) {
    std::tuple<int, int, MultiIndex> key{direction, static_cast<int>(m), x};
    if (mat.rows == 0 || mat.cols == 0 || mat.is_zero())
      diffs.erase(key);
    else
      diffs[key] = mat;
  }

  void set_diff_pair(int direction, const MultiIndex& x, const Matrix& mat) {
    set_diff(direction, Member::D, x, mat);
    set_diff(direction, Member::DTilde, x, mat);
  }

  std::vector<MultiIndex> positions() const { return all_positions(dimension); }
};

namespace detail {

inline bool valid_position(const MultiIndex& x, int dimension) {
  if (static_cast<int>(x.size()) != dimension) return false;
  for (int c : x)
    if (c < 0 || c > 2) return false;
  return true;
}

inline void check_shape(const BinaryMulticomplex& c, ValidationReport& rep) {
  if (c.dimension < 0) {
    rep.add(FailKind::Shape, "negative dimension");
    return;
  }
  for (const auto& [x, r] : c.ranks) {
    if (!valid_position(x, c.dimension))
      rep.add(FailKind::Shape, "rank at invalid position " + pos_str(x));
    if (r <= 0) rep.add(FailKind::Shape, "non-positive stored rank at " + pos_str(x));
  }
  for (const auto& [key, mat] : c.diffs) {
    const auto& [dir, mem, x] = key;
    if (dir < 1 || dir > c.dimension) {
      rep.add(FailKind::Shape, "differential in invalid direction " + std::to_string(dir));
      continue;
    }
    if (!valid_position(x, c.dimension) || x[static_cast<size_t>(dir - 1)] < 1) {
      rep.add(FailKind::Shape, "differential at invalid position " + pos_str(x) +
                                   " in direction " + std::to_string(dir));
      continue;
    }
    int want_rows = c.rank_at(step_down(x, dir));
    int want_cols = c.rank_at(x);
    if (mat.rows != want_rows || mat.cols != want_cols)
      rep.add(FailKind::Shape,
              "differential " + std::string(member_name(static_cast<Member>(mem))) +
                  " in direction " + std::to_string(dir) + " at " + pos_str(x) + " has shape " +
                  std::to_string(mat.rows) + "x" + std::to_string(mat.cols) + ", expected " +
                  std::to_string(want_rows) + "x" + std::to_string(want_cols));
    if (!entries_in_ring(mat, c.ring))
      rep.add(FailKind::Shape, "differential entries not in " + c.ring.name() + " at " + pos_str(x));
  }
}

}  // namespace detail

// base positions (coordinate in the given direction = 0) of all lines
inline std::vector<MultiIndex> line_bases(int dimension, int direction) {
  std::vector<MultiIndex> out;
  for (auto& x : all_positions(dimension))
    if (x[static_cast<size_t>(direction - 1)] == 0) out.push_back(x);
  return out;
}

inline std::string line_str(int direction, const MultiIndex& base) {
  std::ostringstream os;
  os << "direction " << direction << ", line at ";
  MultiIndex shown = base;
  os << "(";
  for (size_t i = 0; i < shown.size(); ++i) {
    os << (i ? "," : "");
    if (static_cast<int>(i) == direction - 1)
      os << "*";
    else
      os << shown[i];
  }
  os << ")";
  return os.str();
}

// Full validity check: shape, squared-zero composites, cross-direction
// commutation (all four member combinations), then per-line acyclicity of
// each member with witnesses. Semantic checks are skipped when shape fails;
// a line's acyclicity is skipped when its composite is nonzero.
inline ValidationReport validate_multicomplex(const BinaryMulticomplex& c) {
  ValidationReport rep;
  detail::check_shape(c, rep);
  if (!rep.pass) return rep;

  const auto positions = c.positions();
  for (int dir = 1; dir <= c.dimension; ++dir)
    for (int mem = 0; mem < 2; ++mem)
      for (const auto& x : positions) {
        if (x[static_cast<size_t>(dir - 1)] != 2) continue;
        Matrix d2 = c.diff_at(dir, static_cast<Member>(mem), x);
        Matrix d1 = c.diff_at(dir, static_cast<Member>(mem), step_down(x, dir));
        if (!(d1 * d2).is_zero())
          rep.add(FailKind::Composite,
                  std::string(member_name(static_cast<Member>(mem))) + " composite nonzero on " +
                      line_str(dir, step_down(step_down(x, dir), dir)));
      }

  for (int i = 1; i <= c.dimension; ++i)
    for (int j = i + 1; j <= c.dimension; ++j)
      for (int mi = 0; mi < 2; ++mi)
        for (int mj = 0; mj < 2; ++mj)
          for (const auto& x : positions) {
            if (x[static_cast<size_t>(i - 1)] < 1 || x[static_cast<size_t>(j - 1)] < 1) continue;
            Matrix lhs = c.diff_at(i, static_cast<Member>(mi), step_down(x, j)) *
                         c.diff_at(j, static_cast<Member>(mj), x);
            Matrix rhs = c.diff_at(j, static_cast<Member>(mj), step_down(x, i)) *
                         c.diff_at(i, static_cast<Member>(mi), x);
            if (!(lhs == rhs))
              rep.add(FailKind::Commutation,
                      "members " + std::string(member_name(static_cast<Member>(mi))) + "^" +
                          std::to_string(i) + " and " +
                          member_name(static_cast<Member>(mj)) + "^" + std::to_string(j) +
                          " do not commute at " + pos_str(x));
          }

  for (int dir = 1; dir <= c.dimension; ++dir)
    for (const auto& base : line_bases(c.dimension, dir))
      for (int mem = 0; mem < 2; ++mem) {
        MultiIndex x1 = base, x2 = base;
        x1[static_cast<size_t>(dir - 1)] = 1;
        x2[static_cast<size_t>(dir - 1)] = 2;
        Matrix d1 = c.diff_at(dir, static_cast<Member>(mem), x1);
        Matrix d2 = c.diff_at(dir, static_cast<Member>(mem), x2);
        if (!(d1 * d2).is_zero()) continue;  // reported above, exactness meaningless
        const std::string where =
            std::string(member_name(static_cast<Member>(mem))) + " on " + line_str(dir, base);
        bool ok = true;
        if (kernel_saturated(d2, c.ring).rank() != 0) {
          rep.add(FailKind::Acyclicity, where + ": degree-2 map is not injective");
          ok = false;
        }
        Lattice z1 = kernel_saturated(d1, c.ring);
        auto coords = membership_all(d2, z1, c.ring);
        if (!coords) {
          rep.add(FailKind::Acyclicity, where + ": image does not lie in the kernel lattice");
          continue;
        }
        auto inv = invariant_factors(*coords, c.ring);
        if (static_cast<int>(inv.size()) != z1.rank()) {
          rep.add(FailKind::Acyclicity,
                  where + ": image has rank " + std::to_string(inv.size()) +
                      " inside a kernel of rank " + std::to_string(z1.rank()));
          ok = false;
        } else if (!all_units(inv, c.ring)) {
          rep.add(FailKind::Acyclicity,
                  where + ": image is a proper finite-index sublattice of the kernel");
          ok = false;
        }
        auto rinv = right_inverse(d1, c.ring);
        if (!rinv) {
          rep.add(FailKind::Acyclicity, where + ": degree-1 map is not surjective over " +
                                            c.ring.name());
          ok = false;
        }
        if (ok) rep.witnesses[{dir, mem, base}] = AcyclicityWitness{z1, *coords, *rinv};
      }

  return rep;
}

// directions whose two members agree everywhere
inline std::vector<int> diagonal_directions(const BinaryMulticomplex& c) {
  std::vector<int> out;
  for (int dir = 1; dir <= c.dimension; ++dir) {
    bool diag = true;
    for (const auto& x : c.positions()) {
      if (x[static_cast<size_t>(dir - 1)] < 1) continue;
      if (!(c.diff_at(dir, Member::D, x) == c.diff_at(dir, Member::DTilde, x))) {
        diag = false;
        break;
      }
    }
    if (diag) out.push_back(dir);
  }
  return out;
}

// overwrite the second member of one direction with the first, producing a
// complex diagonal in that direction; the input's validity is rechecked
inline BinaryMulticomplex delta_embed(const BinaryMulticomplex& c, int direction) {
  if (direction < 1 || direction > c.dimension)
    throw std::invalid_argument("delta_embed: direction out of range");
  BinaryMulticomplex out = c;
  for (const auto& x : c.positions()) {
    if (x[static_cast<size_t>(direction - 1)] < 1) continue;
    out.set_diff(direction, Member::DTilde, x, c.diff_at(direction, Member::D, x));
  }
  auto rep = validate_multicomplex(out);
  if (!rep.pass) throw ValidationError(std::move(rep));
  return out;
}

// raise the dimension by one: the new last direction carries identity
// differentials on the two-term window {lo, lo+1}, both members; every line
// of the new direction is the cone of an identity, so validity is preserved
inline BinaryMulticomplex add_diagonal_direction(const BinaryMulticomplex& c, int lo) {
  if (lo != 0 && lo != 1) throw std::invalid_argument("add_diagonal_direction: lo must be 0 or 1");
  BinaryMulticomplex out;
  out.ring = c.ring;
  out.dimension = c.dimension + 1;
  for (const auto& [x, r] : c.ranks)
    for (int j : {lo, lo + 1}) {
      MultiIndex y = x;
      y.push_back(j);
      out.set_rank(y, r);
    }
  for (const auto& [key, mat] : c.diffs) {
    const auto& [dir, mem, x] = key;
    for (int j : {lo, lo + 1}) {
      MultiIndex y = x;
      y.push_back(j);
      out.set_diff(dir, static_cast<Member>(mem), y, mat);
    }
  }
  for (const auto& [x, r] : c.ranks) {
    MultiIndex y = x;
    y.push_back(lo + 1);
    out.set_diff_pair(out.dimension, y, Matrix::identity(r));
  }
  auto rep = validate_multicomplex(out);
  if (!rep.pass)
    throw InternalInvariantViolation("add_diagonal_direction: result failed validation: " +
                                     rep.summary());
  return out;
}

inline BinaryMulticomplex direct_sum(const BinaryMulticomplex& a, const BinaryMulticomplex& b) {
  if (a.ring != b.ring) throw DimensionMismatchError("direct_sum: ring mismatch");
  if (a.dimension != b.dimension)
    throw DimensionMismatchError("direct_sum: dimension mismatch");
  BinaryMulticomplex out;
  out.ring = a.ring;
  out.dimension = a.dimension;
  for (const auto& x : a.positions()) {
    out.set_rank(x, a.rank_at(x) + b.rank_at(x));
    for (int dir = 1; dir <= a.dimension; ++dir) {
      if (x[static_cast<size_t>(dir - 1)] < 1) continue;
      for (int mem = 0; mem < 2; ++mem)
        out.set_diff(dir, static_cast<Member>(mem), x,
                     block_diag(a.diff_at(dir, static_cast<Member>(mem), x),
                                b.diff_at(dir, static_cast<Member>(mem), x)));
    }
  }
  return out;
}

}  // namespace kwitness
