#pragma once

// Certificates that a class [F, nu] - [F, 0] vanishes: a registry of
// validated objects, a list of relation steps (short exact sequences with
// explicit splittings, diagonal declarations, isomorphisms), and a claim
// that must be an integer combination of the step relations. The producer
// (reduce_nil_generator) and the checker (verify_certificate) share only the
// data model and the linear-algebra primitives; the checker replays every
// identity from scratch and never calls the splitting or reduction code.

#include "kwitness/linalg.hpp"
#include "kwitness/matrix.hpp"
#include "kwitness/multicomplex.hpp"
#include "kwitness/nil.hpp"
#include "kwitness/ring.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace kwitness {

using ObjectId = std::string;

// element of the free abelian group on object ids
struct FormalSum {
  std::map<ObjectId, BigInt> terms;  // nonzero coefficients only

  void add(const ObjectId& id, const BigInt& c) {
    if (c == 0) return;
    BigInt& v = terms[id];
    v += c;
    if (v == 0) terms.erase(id);
  }

  void add_scaled(const FormalSum& o, const BigInt& c) {
    for (const auto& [id, v] : o.terms) add(id, v * c);
  }

  bool is_zero() const { return terms.empty(); }

  bool operator==(const FormalSum&) const = default;

  std::string str() const {
    if (terms.empty()) return "0";
    std::string s;
    for (const auto& [id, c] : terms) {
      if (!s.empty() || c < 0) s += (c < 0 ? " - " : " + ");
      BigInt a = big_abs(c);
      if (a != 1) s += a.str() + "*";
      s += "[" + id + "]";
    }
    return s;
  }
};

struct ObjectRegistry {
  std::vector<ObjectId> order;
  std::map<ObjectId, NilMulticomplex> objects;

  ObjectId add(NilMulticomplex n) {
    ObjectId id = "obj" + std::to_string(order.size());
    order.push_back(id);
    objects.emplace(id, std::move(n));
    return id;
  }

  // for deserialization; ids keep file order
  void add_named(const ObjectId& id, NilMulticomplex n) {
    if (objects.count(id)) throw std::invalid_argument("registry: duplicate id " + id);
    order.push_back(id);
    objects.emplace(id, std::move(n));
  }

  const NilMulticomplex* find(const ObjectId& id) const {
    auto it = objects.find(id);
    return it == objects.end() ? nullptr : &it->second;
  }

  bool operator==(const ObjectRegistry&) const = default;
};

// [total] = [sub] + [quotient], witnessed by an inclusion, a projection and
// a retraction splitting the inclusion, all commuting with the structure
struct ShortExactStep {
  ObjectId sub, total, quotient;
  std::map<MultiIndex, Matrix> inclusion;   // nonzero blocks only
  std::map<MultiIndex, Matrix> projection;
  std::map<MultiIndex, Matrix> retraction;

  bool operator==(const ShortExactStep&) const = default;
};

// [object] = 0 for an object diagonal in the given direction with zero
// endomorphism
struct DiagonalStep {
  ObjectId object;
  int direction = 1;

  bool operator==(const DiagonalStep&) const = default;
};

// [left] = [right] witnessed by an invertible structure-preserving map
struct IsomorphismStep {
  ObjectId left, right;
  std::map<MultiIndex, Matrix> matrices;

  bool operator==(const IsomorphismStep&) const = default;
};

using RelationStep = std::variant<ShortExactStep, DiagonalStep, IsomorphismStep>;

struct Certificate {
  RingSpec ring;
  ObjectRegistry registry;
  ObjectId target_nu, target_zero;
  std::vector<RelationStep> steps;
  FormalSum claim;

  bool operator==(const Certificate&) const = default;
};

inline FormalSum step_contribution(const RelationStep& step) {
  FormalSum s;
  if (const auto* se = std::get_if<ShortExactStep>(&step)) {
    s.add(se->total, 1);
    s.add(se->sub, -1);
    s.add(se->quotient, -1);
  } else if (const auto* di = std::get_if<DiagonalStep>(&step)) {
    s.add(di->object, 1);
  } else {
    const auto& iso = std::get<IsomorphismStep>(step);
    s.add(iso.left, 1);
    s.add(iso.right, -1);
  }
  return s;
}

// Integer combination expressing target in the span of the relations, found
// by a Hermite-form solve of the relation matrix; the combination is
// replayed exactly before it is returned.
inline std::optional<std::vector<BigInt>> formal_membership(
    const FormalSum& target, const std::vector<FormalSum>& relations) {
  if (relations.empty()) {
    if (target.is_zero()) return std::vector<BigInt>{};
    return std::nullopt;
  }
  std::set<ObjectId> ids;
  for (const auto& [id, c] : target.terms) ids.insert(id);
  for (const auto& rel : relations)
    for (const auto& [id, c] : rel.terms) ids.insert(id);
  std::map<ObjectId, int> row_of;
  int nr = 0;
  for (const auto& id : ids) row_of[id] = nr++;
  const int nc = static_cast<int>(relations.size());
  Matrix a(nr, nc);
  for (int j = 0; j < nc; ++j)
    for (const auto& [id, c] : relations[static_cast<size_t>(j)].terms)
      a.at(row_of.at(id), j) = Scalar(c);
  Matrix t(nr, 1);
  for (const auto& [id, c] : target.terms) t.at(row_of.at(id), 0) = Scalar(c);

  const RingSpec z = RingSpec::integers();
  auto ht = hnf(a.transpose(), z);
  int rk = ht.rank();
  Matrix basis = ht.h.sub_rows(0, rk).transpose();  // column lattice of a, canonical
  auto y = membership_all(t, Lattice{nr, basis}, z);
  if (!y) return std::nullopt;
  Matrix c = ht.u.sub_rows(0, rk).transpose() * *y;
  std::vector<BigInt> out;
  out.reserve(static_cast<size_t>(nc));
  FormalSum replay;
  for (int j = 0; j < nc; ++j) {
    if (!c.at(j, 0).is_integer())
      throw InternalInvariantViolation("formal_membership: non-integer combination");
    out.push_back(c.at(j, 0).num);
    replay.add_scaled(relations[static_cast<size_t>(j)], c.at(j, 0).num);
  }
  if (!(replay == target))
    throw InternalInvariantViolation("formal_membership: combination replay failed");
  return out;
}

struct Verdict {
  bool accepted = false;
  std::string failure;  // empty iff accepted; names the earliest failed check
  std::optional<std::vector<BigInt>> combination;  // membership coefficients
};

// Full replay of a certificate. Checks, in order: structural references and
// claim form, validity of every registered object, every step's identity
// battery, and finally that the claim is an integer combination of the step
// relations. Never throws on malformed input; returns a reject verdict
// naming the earliest failure.
inline Verdict verify_certificate(const Certificate& cert) {
  auto reject = [](std::string why) { return Verdict{false, std::move(why), std::nullopt}; };

  // structure: targets registered, claim = [nu] - [zero], same base, zero side zero
  const NilMulticomplex* tn = cert.registry.find(cert.target_nu);
  const NilMulticomplex* tz = cert.registry.find(cert.target_zero);
  if (!tn || !tz) return reject("structure: target object not registered");
  if (cert.target_nu == cert.target_zero)
    return reject("structure: target pair must be two registered objects");
  FormalSum want;
  want.add(cert.target_nu, 1);
  want.add(cert.target_zero, -1);
  if (!(cert.claim == want))
    return reject("structure: claim does not state [" + cert.target_nu + "] - [" +
                  cert.target_zero + "]");
  if (!(tn->base == tz->base))
    return reject("structure: target pair does not share its base complex");
  if (!tz->nil_is_zero())
    return reject("structure: zero-side target carries a nonzero endomorphism");
  if (tn->base.ring != cert.ring) return reject("structure: target ring mismatch");
  for (const auto& id : cert.registry.order) {
    const NilMulticomplex* obj = cert.registry.find(id);
    if (obj->base.ring != cert.ring)
      return reject("structure: object " + id + " ring mismatch");
  }

  for (const auto& id : cert.registry.order) {
    ValidationReport rep = validate_nil(*cert.registry.find(id));
    if (!rep.pass) return reject("object " + id + ": " + rep.summary());
  }

  for (size_t si = 0; si < cert.steps.size(); ++si) {
    const std::string at = "step " + std::to_string(si);
    const RelationStep& step = cert.steps[si];

    if (const auto* se = std::get_if<ShortExactStep>(&step)) {
      const NilMulticomplex* sub = cert.registry.find(se->sub);
      const NilMulticomplex* tot = cert.registry.find(se->total);
      const NilMulticomplex* quo = cert.registry.find(se->quotient);
      if (!sub || !tot || !quo) return reject(at + ": unregistered object reference");
      const int dim = tot->base.dimension;
      if (sub->base.dimension != dim || quo->base.dimension != dim)
        return reject(at + ": dimension mismatch across the sequence");
      for (const auto& x : tot->base.positions()) {
        const int r = tot->base.rank_at(x);
        const int k = sub->base.rank_at(x);
        const int q = quo->base.rank_at(x);
        if (k + q != r)
          return reject(at + ": ranks not additive at " + pos_str(x));
        auto fetch = [&](const std::map<MultiIndex, Matrix>& m, int rr, int cc) {
          auto it = m.find(x);
          return it == m.end() ? Matrix(rr, cc) : it->second;
        };
        Matrix inc = fetch(se->inclusion, r, k);
        Matrix prj = fetch(se->projection, q, r);
        Matrix ret = fetch(se->retraction, k, r);
        if (inc.rows != r || inc.cols != k || prj.rows != q || prj.cols != r ||
            ret.rows != k || ret.cols != r)
          return reject(at + ": witness matrix shape mismatch at " + pos_str(x));
        if (!entries_in_ring(inc, cert.ring) || !entries_in_ring(prj, cert.ring) ||
            !entries_in_ring(ret, cert.ring))
          return reject(at + ": witness entries not in " + cert.ring.name() + " at " + pos_str(x));
        if (!(prj * inc).is_zero())
          return reject(at + ": projection*inclusion nonzero at " + pos_str(x));
        if (!(ret * inc).is_identity())
          return reject(at + ": retraction does not split the inclusion at " + pos_str(x));
        auto inc_inv = invariant_factors(inc, cert.ring);
        if (static_cast<int>(inc_inv.size()) != k || !all_units(inc_inv, cert.ring))
          return reject(at + ": inclusion is not a saturated embedding at " + pos_str(x));
        auto prj_inv = invariant_factors(prj, cert.ring);
        if (static_cast<int>(prj_inv.size()) != q || !all_units(prj_inv, cert.ring))
          return reject(at + ": projection is not surjective over the ring at " + pos_str(x));
        Lattice ker = kernel_saturated(prj, cert.ring);
        Lattice img{r, col_hnf(inc, cert.ring)};
        if (!lattice_equal(ker, img))
          return reject(at + ": kernel of the projection differs from the image at " + pos_str(x));
        if (!(tot->nil_at(x) * inc == inc * sub->nil_at(x)))
          return reject(at + ": inclusion does not intertwine the endomorphisms at " + pos_str(x));
        if (!(quo->nil_at(x) * prj == prj * tot->nil_at(x)))
          return reject(at + ": projection does not intertwine the endomorphisms at " + pos_str(x));
      }
      for (int dir = 1; dir <= dim; ++dir)
        for (int mem = 0; mem < 2; ++mem)
          for (const auto& x : tot->base.positions()) {
            if (x[static_cast<size_t>(dir - 1)] < 1) continue;
            MultiIndex y = step_down(x, dir);
            auto fetch = [&](const std::map<MultiIndex, Matrix>& m, const MultiIndex& p, int rr,
                             int cc) {
              auto it = m.find(p);
              return it == m.end() ? Matrix(rr, cc) : it->second;
            };
            Matrix inc_x = fetch(se->inclusion, x, tot->base.rank_at(x), sub->base.rank_at(x));
            Matrix inc_y = fetch(se->inclusion, y, tot->base.rank_at(y), sub->base.rank_at(y));
            Matrix prj_x = fetch(se->projection, x, quo->base.rank_at(x), tot->base.rank_at(x));
            Matrix prj_y = fetch(se->projection, y, quo->base.rank_at(y), tot->base.rank_at(y));
            Member m = static_cast<Member>(mem);
            if (!(tot->base.diff_at(dir, m, x) * inc_x == inc_y * sub->base.diff_at(dir, m, x)))
              return reject(at + ": inclusion square fails for " +
                            std::string(member_name(m)) + "^" + std::to_string(dir) + " at " +
                            pos_str(x));
            if (!(quo->base.diff_at(dir, m, x) * prj_x == prj_y * tot->base.diff_at(dir, m, x)))
              return reject(at + ": projection square fails for " +
                            std::string(member_name(m)) + "^" + std::to_string(dir) + " at " +
                            pos_str(x));
          }
    } else if (const auto* di = std::get_if<DiagonalStep>(&step)) {
      const NilMulticomplex* obj = cert.registry.find(di->object);
      if (!obj) return reject(at + ": unregistered object reference");
      if (di->direction < 1 || di->direction > obj->base.dimension)
        return reject(at + ": direction out of range");
      if (!obj->nil_is_zero())
        return reject(at + ": diagonal step on an object with nonzero endomorphism");
      for (const auto& x : obj->base.positions()) {
        if (x[static_cast<size_t>(di->direction - 1)] < 1) continue;
        if (!(obj->base.diff_at(di->direction, Member::D, x) ==
              obj->base.diff_at(di->direction, Member::DTilde, x)))
          return reject(at + ": object is not diagonal in direction " +
                        std::to_string(di->direction) + " at " + pos_str(x));
      }
    } else {
      const auto& iso = std::get<IsomorphismStep>(step);
      const NilMulticomplex* lhs = cert.registry.find(iso.left);
      const NilMulticomplex* rhs = cert.registry.find(iso.right);
      if (!lhs || !rhs) return reject(at + ": unregistered object reference");
      if (lhs->base.dimension != rhs->base.dimension)
        return reject(at + ": dimension mismatch");
      const int dim = lhs->base.dimension;
      for (const auto& x : lhs->base.positions()) {
        int rl = lhs->base.rank_at(x), rr = rhs->base.rank_at(x);
        if (rl != rr) return reject(at + ": rank mismatch at " + pos_str(x));
        auto it = iso.matrices.find(x);
        Matrix phi = it == iso.matrices.end() ? Matrix(rr, rl) : it->second;
        if (phi.rows != rr || phi.cols != rl)
          return reject(at + ": matrix shape mismatch at " + pos_str(x));
        if (rl == 0) continue;
        if (!entries_in_ring(phi, cert.ring))
          return reject(at + ": matrix entries not in " + cert.ring.name() + " at " + pos_str(x));
        if (!is_unit(det_exact(phi), cert.ring))
          return reject(at + ": matrix not invertible over the ring at " + pos_str(x));
        if (!(rhs->nil_at(x) * phi == phi * lhs->nil_at(x)))
          return reject(at + ": map does not intertwine the endomorphisms at " + pos_str(x));
      }
      for (int dir = 1; dir <= dim; ++dir)
        for (int mem = 0; mem < 2; ++mem)
          for (const auto& x : lhs->base.positions()) {
            if (x[static_cast<size_t>(dir - 1)] < 1) continue;
            MultiIndex y = step_down(x, dir);
            auto fetch = [&](const MultiIndex& p) {
              auto it2 = iso.matrices.find(p);
              return it2 == iso.matrices.end()
                         ? Matrix(rhs->base.rank_at(p), lhs->base.rank_at(p))
                         : it2->second;
            };
            Member m = static_cast<Member>(mem);
            if (!(rhs->base.diff_at(dir, m, x) * fetch(x) == fetch(y) * lhs->base.diff_at(dir, m, x)))
              return reject(at + ": square fails for " + std::string(member_name(m)) + "^" +
                            std::to_string(dir) + " at " + pos_str(x));
          }
    }
  }

  std::vector<FormalSum> relations;
  relations.reserve(cert.steps.size());
  for (const auto& step : cert.steps) relations.push_back(step_contribution(step));
  auto comb = formal_membership(cert.claim, relations);
  if (!comb)
    return reject("claim: not an integer combination of the step relations");
  return Verdict{true, "", std::move(comb)};
}

// the splitting side conditions failed on this (itself valid) object
struct ReductionFailure {
  SplitFailure failure;
  NilMulticomplex instance;  // object whose layer split failed
  int depth = 0;

  std::string summary() const {
    return failure.summary() + " at recursion depth " + std::to_string(depth);
  }
};

// Telescoping reduction: peel the kernel of nu^e off the nu-side and the
// zero-side in parallel short exact sequences, identify the quotients when
// both endomorphisms vanish, and recurse. Produces a certificate whose claim
// is [input with nu] - [input with 0], or the first splitting failure.
inline std::variant<Certificate, ReductionFailure> reduce_nil_generator(
    const NilMulticomplex& input, SplitStrategy strategy) {
  {
    ValidationReport rep = validate_nil(input);
    if (!rep.pass)
      throw std::invalid_argument("reduce_nil_generator: input invalid: " + rep.summary());
  }
  Certificate cert;
  cert.ring = input.base.ring;
  ObjectId nu_id = cert.registry.add(input);
  ObjectId zero_id = cert.registry.add(input.with_zero_nil());
  cert.target_nu = nu_id;
  cert.target_zero = zero_id;
  cert.claim.add(nu_id, 1);
  cert.claim.add(zero_id, -1);

  const int budget = nil_index(input).max_index + 1;
  std::optional<ReductionFailure> failed;

  auto identity_iso = [&](const ObjectId& l, const ObjectId& r, const NilMulticomplex& obj) {
    IsomorphismStep iso{l, r, {}};
    for (const auto& [x, rk] : obj.base.ranks) iso.matrices[x] = Matrix::identity(rk);
    cert.steps.push_back(std::move(iso));
  };

  // recurse on the pair ([obj, nu], [obj, 0]) with registered ids
  auto drive = [&](auto&& self, const ObjectId& id_nu, const ObjectId& id_zero,
                   const NilMulticomplex& obj, int depth) -> bool {
    if (obj.nil_is_zero()) {
      identity_iso(id_nu, id_zero, obj);
      return true;
    }
    if (depth >= budget) {
      failed = ReductionFailure{
          SplitFailure{strategy, -1, "driver",
                       {{FailKind::Acyclicity, "recursion exceeded the nilpotency index budget"}}},
          obj, depth};
      return false;
    }
    auto split = layer_split(obj, strategy);
    if (auto* f = std::get_if<SplitFailure>(&split)) {
      failed = ReductionFailure{*f, obj, depth};
      return false;
    }
    FiltrationLayer& layer = std::get<FiltrationLayer>(split);

    const bool sub_pair_trivial = layer.sub.nil_is_zero();
    ObjectId sub_nu = cert.registry.add(layer.sub);
    ObjectId sub_zero = sub_pair_trivial ? sub_nu : cert.registry.add(layer.sub.with_zero_nil());
    ObjectId quot_nu = cert.registry.add(layer.quotient);
    ObjectId quot_zero = cert.registry.add(layer.quotient.with_zero_nil());

    ShortExactStep ses_nu{sub_nu, id_nu, quot_nu, {}, {}, {}};
    for (const auto& [x, k] : layer.kernels) {
      if (k.rank() == 0) continue;
      ses_nu.inclusion[x] = k.basis;
      ses_nu.retraction[x] = layer.splittings.at(x).retraction;
    }
    for (const auto& [x, s] : layer.splittings) {
      if (s.projection.rows == 0 || s.projection.cols == 0) continue;
      ses_nu.projection[x] = s.projection;
    }
    ShortExactStep ses_zero = ses_nu;
    ses_zero.sub = sub_zero;
    ses_zero.total = id_zero;
    ses_zero.quotient = quot_zero;
    cert.steps.push_back(std::move(ses_nu));
    cert.steps.push_back(std::move(ses_zero));

    if (layer.quotient.nil_is_zero()) {
      identity_iso(quot_nu, quot_zero, layer.quotient);
    } else if (!self(self, quot_nu, quot_zero, layer.quotient, depth + 1)) {
      return false;
    }
    if (!sub_pair_trivial && !self(self, sub_nu, sub_zero, layer.sub, depth + 1)) return false;
    return true;
  };

  if (!drive(drive, nu_id, zero_id, input, 0)) return *failed;

  std::vector<FormalSum> relations;
  relations.reserve(cert.steps.size());
  for (const auto& step : cert.steps) relations.push_back(step_contribution(step));
  if (!formal_membership(cert.claim, relations))
    throw InternalInvariantViolation("reduce: emitted steps do not span the claim");
  return cert;
}

}  // namespace kwitness
