#pragma once

// Deterministic self-test suites, runnable from the CLI. Each suite derives
// per-sample seeds from (seed, index), writes results into per-index slots
// and merges them in index order, so output is identical for any
// KWITNESS_THREADS value.

#include "kwitness/certificate.hpp"
#include "kwitness/corpus.hpp"
#include "kwitness/io.hpp"
#include "kwitness/nil.hpp"
#include "kwitness/parallel.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace kwitness {
namespace selftest {

struct SuiteResult {
  std::string name;
  bool pass = true;
  std::vector<std::string> notes;
  std::map<std::string, long> counters;
  double seconds = 0;

  void note(std::string s) { notes.push_back(std::move(s)); }

  void fail(std::string s) {
    pass = false;
    notes.push_back("FAIL: " + std::move(s));
  }
};

// replay the verifier's reported combination with plain formal arithmetic,
// independently of the Hermite-form membership solver
inline bool combination_crosscheck(const Certificate& cert, const Verdict& v) {
  if (!v.accepted || !v.combination) return false;
  if (v.combination->size() != cert.steps.size()) return false;
  FormalSum sum;
  for (size_t i = 0; i < cert.steps.size(); ++i)
    sum.add_scaled(step_contribution(cert.steps[i]), (*v.combination)[i]);
  return sum == cert.claim;
}

namespace detail {

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// rational rank by a deliberately separate elimination (column-major sweep),
// used as the independent half of the acyclicity oracle
inline int oracle_rank(Matrix m) {
  int rank = 0;
  std::vector<bool> used(static_cast<size_t>(m.rows), false);
  for (int c = 0; c < m.cols; ++c) {
    int piv = -1;
    for (int r = 0; r < m.rows; ++r)
      if (!used[static_cast<size_t>(r)] && !m.at(r, c).is_zero()) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    used[static_cast<size_t>(piv)] = true;
    ++rank;
    for (int r = 0; r < m.rows; ++r) {
      if (r == piv || m.at(r, c).is_zero()) continue;
      Scalar f = m.at(r, c) / m.at(piv, c);
      for (int j = 0; j < m.cols; ++j) m.at(r, j) -= f * m.at(piv, j);
    }
  }
  return rank;
}

}  // namespace detail

// --- nil0: dimension-0 pipeline over Z and over Z_(p) ---------------------

inline SuiteResult suite_nil0(uint64_t seed) {
  SuiteResult res{"nil0"};
  auto run_batch = [&](const RingSpec& ring, int count, uint64_t salt, const std::string& label) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> errs(static_cast<size_t>(count));
    std::vector<int> cross(static_cast<size_t>(count), 0);  // 1 checked ok, 2 checked bad
    parallel_for(static_cast<size_t>(count), [&](size_t i) {
      Rng rng(derive_seed(seed ^ salt, i));
      int r = static_cast<int>(rng.uniform(1, 6));
      NilMulticomplex inst = nil_single(ring, random_nilpotent(rng, r, ring));
      int m = nil_index(inst).max_index;
      auto out = reduce_nil_generator(inst, SplitStrategy::MaxIndex);
      if (auto* f = std::get_if<ReductionFailure>(&out)) {
        errs[i] = "reduction failed: " + f->summary();
        return;
      }
      const Certificate& cert = std::get<Certificate>(out);
      const int expect = inst.nil_is_zero() ? 1 : 3 * (m - 1);
      if (static_cast<int>(cert.steps.size()) != expect) {
        errs[i] = "expected " + std::to_string(expect) + " steps, got " +
                  std::to_string(cert.steps.size());
        return;
      }
      Verdict v = verify_certificate(cert);
      if (!v.accepted) {
        errs[i] = "verifier rejected: " + v.failure;
        return;
      }
      cross[i] = combination_crosscheck(cert, v) ? 1 : 2;
      if (cross[i] == 2) errs[i] = "combination crosscheck failed";
    });
    long ok = 0, checked = 0, cbad = 0;
    for (int i = 0; i < count; ++i) {
      if (cross[static_cast<size_t>(i)] != 0) ++checked;
      if (cross[static_cast<size_t>(i)] == 2) ++cbad;
      if (errs[static_cast<size_t>(i)].empty())
        ++ok;
      else if (!res.counters.count(label + "_first_bad")) {
        res.fail(label + "[" + std::to_string(i) + "]: " + errs[static_cast<size_t>(i)]);
        res.counters[label + "_first_bad"] = i;
      }
    }
    if (ok != count) res.pass = false;
    res.counters[label + "_total"] = count;
    res.counters[label + "_ok"] = ok;
    res.counters[label + "_crosschecked"] = checked;
    res.counters[label + "_crosscheck_bad"] = cbad;
    res.counters[label + "_ms"] = static_cast<long>(detail::elapsed_s(t0) * 1000);
    std::ostringstream line;
    line << label << ": " << ok << "/" << count << " reduced, verified and cross-checked ("
         << res.counters[label + "_ms"] << " ms)";
    res.note(line.str());
  };
  auto t0 = std::chrono::steady_clock::now();
  run_batch(RingSpec::integers(), 200, 0x6e303000ull, "z");
  run_batch(RingSpec::localized_at(2), 100, 0x6e303200ull, "z2");
  run_batch(RingSpec::localized_at(3), 100, 0x6e303300ull, "z3");
  run_batch(RingSpec::localized_at(5), 100, 0x6e303500ull, "z5");
  res.seconds = detail::elapsed_s(t0);
  return res;
}

// --- nil1: dimension-1 pipeline, failures logged and re-validated ---------

inline SuiteResult suite_nil1(uint64_t seed) {
  SuiteResult res{"nil1"};
  auto t0 = std::chrono::steady_clock::now();
  const int total = 100;
  std::vector<std::string> errs(static_cast<size_t>(total));
  std::vector<int> outcome(static_cast<size_t>(total), 0);  // 1 cert, 2 logged failure
  std::vector<int> cross(static_cast<size_t>(total), 0);    // 1 checked ok, 2 checked bad
  std::vector<std::string> failure_lines(static_cast<size_t>(total));
  parallel_for(static_cast<size_t>(total), [&](size_t i) {
    uint64_t s = derive_seed(seed ^ 0x6e313100ull, i);
    BinaryMulticomplex cpx = random_acyclic_binary(s, 1, 3, 2, RingSpec::integers());
    NilMulticomplex inst{cpx, {}};
    if (i % 4 == 0) {
      inst = shift_nil(cpx);
    } else {
      auto samples = commutant_nilpotent_sample(cpx, derive_seed(s, 1), 24);
      inst = samples.front();
      for (const auto& cand : samples)
        if (!cand.nil_is_zero()) {
          inst = cand;
          break;
        }
    }
    SplitStrategy strat =
        (i % 3 == 2) ? SplitStrategy::PaperMinIndex : SplitStrategy::MaxIndex;
    auto out = reduce_nil_generator(inst, strat);
    if (auto* cert = std::get_if<Certificate>(&out)) {
      outcome[i] = 1;
      Verdict v = verify_certificate(*cert);
      if (!v.accepted) {
        errs[i] = "verifier rejected: " + v.failure;
      } else {
        cross[i] = combination_crosscheck(*cert, v) ? 1 : 2;
        if (cross[i] == 2) errs[i] = "combination crosscheck failed";
      }
    } else {
      outcome[i] = 2;
      const auto& rf = std::get<ReductionFailure>(out);
      // the logged report must carry the diagnostics and re-validate
      NilMulticomplex re = io::instance_from_json(io::parse_text(io::dump(io::failure_report_to_json(rf))));
      if (!validate_nil(re).pass)
        errs[i] = "failure report instance does not re-validate";
      else
        failure_lines[i] = rf.summary();
    }
  });
  long certs = 0, failures = 0, checked = 0, cbad = 0;
  for (int i = 0; i < total; ++i) {
    if (outcome[static_cast<size_t>(i)] == 1) ++certs;
    if (outcome[static_cast<size_t>(i)] == 2) ++failures;
    if (cross[static_cast<size_t>(i)] != 0) ++checked;
    if (cross[static_cast<size_t>(i)] == 2) ++cbad;
    if (!errs[static_cast<size_t>(i)].empty() && res.pass)
      res.fail("instance " + std::to_string(i) + ": " + errs[static_cast<size_t>(i)]);
  }
  res.counters["total"] = total;
  res.counters["certificates"] = certs;
  res.counters["reduction_failures"] = failures;
  res.counters["crosschecked"] = checked;
  res.counters["crosscheck_bad"] = cbad;
  std::ostringstream line;
  line << "instances: " << total << ", certificates: " << certs
       << " (all verified), reduction failures: " << failures
       << " (all logged and re-validated)";
  res.note(line.str());
  for (int i = 0, shown = 0; i < total && shown < 3; ++i)
    if (!failure_lines[static_cast<size_t>(i)].empty()) {
      res.note("  failure[" + std::to_string(i) + "]: " + failure_lines[static_cast<size_t>(i)]);
      ++shown;
    }
  res.seconds = detail::elapsed_s(t0);
  return res;
}

// --- nil2: curated two-directional suite -----------------------------------

inline SuiteResult suite_nil2(uint64_t seed) {
  SuiteResult res{"nil2"};
  auto t0 = std::chrono::steady_clock::now();
  const int total = 12;
  std::vector<std::string> errs(static_cast<size_t>(total));
  std::vector<int> outcome(static_cast<size_t>(total), 0);
  std::vector<int> cross(static_cast<size_t>(total), 0);
  parallel_for(static_cast<size_t>(total), [&](size_t j) {
    uint64_t s = derive_seed(seed ^ 0x6e323200ull, j);
    BinaryMulticomplex base = random_acyclic_binary(s, 1, 2, 2, RingSpec::integers());
    BinaryMulticomplex two = add_diagonal_direction(base, static_cast<int>(j % 2));
    if (j % 3 == 1) two = delta_embed(two, 1);
    BinaryMulticomplex f = (j % 3 == 2) ? direct_sum(two, two) : two;
    NilMulticomplex inst{f, {}};
    if (j % 2 == 0) {
      inst = shift_nil(f);
    } else {
      auto samples = commutant_nilpotent_sample(f, derive_seed(s, 2), 12);
      inst = samples.front();
      for (const auto& cand : samples)
        if (!cand.nil_is_zero()) {
          inst = cand;
          break;
        }
      if (inst.nil_is_zero()) inst = shift_nil(f);
    }
    SplitStrategy strat = (j % 4 == 3) ? SplitStrategy::PaperMinIndex : SplitStrategy::MaxIndex;
    auto out = reduce_nil_generator(inst, strat);
    if (auto* cert = std::get_if<Certificate>(&out)) {
      outcome[j] = 1;
      Verdict v = verify_certificate(*cert);
      if (!v.accepted) {
        errs[j] = "verifier rejected: " + v.failure;
      } else {
        cross[j] = combination_crosscheck(*cert, v) ? 1 : 2;
        if (cross[j] == 2) errs[j] = "combination crosscheck failed";
      }
    } else {
      outcome[j] = 2;
      const auto& rf = std::get<ReductionFailure>(out);
      NilMulticomplex re = io::instance_from_json(io::parse_text(io::dump(io::failure_report_to_json(rf))));
      if (!validate_nil(re).pass) errs[j] = "failure report instance does not re-validate";
    }
  });
  long certs = 0, failures = 0, checked = 0, cbad = 0;
  for (int j = 0; j < total; ++j) {
    if (outcome[static_cast<size_t>(j)] == 1) ++certs;
    if (outcome[static_cast<size_t>(j)] == 2) ++failures;
    if (cross[static_cast<size_t>(j)] != 0) ++checked;
    if (cross[static_cast<size_t>(j)] == 2) ++cbad;
    if (!errs[static_cast<size_t>(j)].empty() && res.pass)
      res.fail("instance " + std::to_string(j) + ": " + errs[static_cast<size_t>(j)]);
  }
  if (certs < 1) res.fail("no certificate was produced at dimension 2");
  res.counters["total"] = total;
  res.counters["certificates"] = certs;
  res.counters["reduction_failures"] = failures;
  res.counters["crosschecked"] = checked;
  res.counters["crosscheck_bad"] = cbad;
  std::ostringstream line;
  line << "instances: " << total << ", certificates: " << certs
       << " (all verified), reduction failures: " << failures << " (all re-validated)";
  res.note(line.str());
  res.seconds = detail::elapsed_s(t0);
  return res;
}

// --- linalg: replay of the normal-form postconditions ----------------------

inline SuiteResult suite_linalg(uint64_t seed) {
  SuiteResult res{"linalg"};
  auto t0 = std::chrono::steady_clock::now();
  const int total = 1000;
  std::vector<std::string> errs(static_cast<size_t>(total));
  const std::vector<RingSpec> rings = {RingSpec::integers(), RingSpec::localized_at(2),
                                       RingSpec::localized_at(3), RingSpec::localized_at(5)};
  parallel_for(static_cast<size_t>(total), [&](size_t i) {
    Rng rng(derive_seed(seed ^ 0x11a70000ull, i));
    const RingSpec& ring = rings[i % rings.size()];
    int rows = static_cast<int>(rng.uniform(1, 6));
    int cols = static_cast<int>(rng.uniform(1, 6));
    Matrix m(rows, cols);
    bool integral = true;
    for (auto& e : m.e) e = Scalar(rng.uniform(-9, 9));
    if (ring.is_local() && rng.uniform(0, 3) == 0) {
      long q = 2;
      while (BigInt(q) == ring.prime) ++q;
      int r = static_cast<int>(rng.uniform(0, rows - 1));
      for (int c = 0; c < cols; ++c) m.at(r, c) = m.at(r, c) / Scalar(q);
      integral = false;
    }
    auto bad = [&](const std::string& what) { errs[i] = what; };
    switch (i % 4) {
      case 0: {
        auto h = hnf(m, ring);
        if (!(h.h == h.u * m)) return bad("hnf: h != u*m");
        if (!is_unit(det_exact(h.u), ring)) return bad("hnf: transform not invertible");
        if (!hnf_is_canonical(h.h, h.pivot_cols, ring)) return bad("hnf: not canonical");
        if (h.rank() != rank_exact(m)) return bad("hnf: rank mismatch");
        break;
      }
      case 1: {
        auto s = snf(m, ring);
        if (!(s.d == s.u * m * s.v)) return bad("snf: d != u*m*v");
        if (!is_unit(det_exact(s.u), ring) || !is_unit(det_exact(s.v), ring))
          return bad("snf: transform not invertible");
        if (s.rank != rank_exact(m)) return bad("snf: rank mismatch");
        for (int a = 0; a < s.d.rows; ++a)
          for (int b = 0; b < s.d.cols; ++b)
            if (a != b && !s.d.at(a, b).is_zero()) return bad("snf: off-diagonal entry");
        for (int a = 0; a < s.rank; ++a) {
          const Scalar& da = s.d.at(a, a);
          if (canonical_associate(da, ring).first != da) return bad("snf: non-canonical factor");
          if (a + 1 < s.rank && !divides(da, s.d.at(a + 1, a + 1), ring))
            return bad("snf: divisibility chain broken");
        }
        if (ring.is_local() && integral) {
          // localization coherence: p-parts of the integer invariant factors
          auto fz = invariant_factors(m, RingSpec::integers());
          auto fp = invariant_factors(m, ring);
          if (fz.size() != fp.size()) return bad("snf: rank differs from integer rank");
          for (size_t a = 0; a < fz.size(); ++a) {
            long vz = p_valuation(fz[a].num, ring.prime);
            long vp = valuation(fp[a], ring.prime);
            if (vz != vp) return bad("snf: p-part differs from the integer computation");
          }
        }
        break;
      }
      case 2: {
        Lattice l = kernel_saturated(m, ring);
        if (!(m * l.basis).is_zero()) return bad("kernel: basis not annihilated");
        if (l.rank() != cols - rank_exact(m)) return bad("kernel: rank mismatch");
        if (l.rank() > 0) {
          Matrix c(l.rank(), 1);
          for (int a = 0; a < l.rank(); ++a) c.at(a, 0) = Scalar(rng.uniform(-4, 4));
          Matrix v = l.basis * c;
          auto got = membership(v, l, ring);
          if (!got || !(*got == c)) return bad("kernel: membership round trip failed");
        }
        Matrix probe(cols, 1);
        for (int a = 0; a < cols; ++a) probe.at(a, 0) = Scalar(rng.uniform(-4, 4));
        auto sol = solve_exact(l.rank() > 0 ? l.basis : Matrix(cols, 0), probe);
        bool expect = sol && entries_in_ring(*sol, ring) &&
                      (l.rank() > 0 ? l.basis * *sol == probe : probe.is_zero());
        if (static_cast<bool>(membership(probe, l, ring)) != expect)
          return bad("kernel: membership disagrees with direct solve");
        break;
      }
      default: {
        Lattice l = kernel_saturated(m, ring);
        Splitting s = split_saturated_inclusion(l, ring);
        if (!(s.retraction * l.basis).is_identity()) return bad("split: retraction fails");
        if (!(s.projection * s.complement).is_identity()) return bad("split: projection fails");
        if (l.rank() > 0 && s.complement.cols > 0 && !(s.retraction * s.complement).is_zero())
          return bad("split: retraction does not kill the complement");
        if (s.complement.cols > 0 && l.rank() > 0 && !(s.projection * l.basis).is_zero())
          return bad("split: projection does not kill the lattice");
        if (!is_unit(det_exact(hstack(l.basis, s.complement)), ring))
          return bad("split: completed basis not invertible");
        break;
      }
    }
  });
  long ok = 0;
  for (int i = 0; i < total; ++i) {
    if (errs[static_cast<size_t>(i)].empty())
      ++ok;
    else if (res.pass)
      res.fail("instance " + std::to_string(i) + ": " + errs[static_cast<size_t>(i)]);
  }
  if (ok != total) res.pass = false;
  res.counters["total"] = total;
  res.counters["ok"] = ok;
  res.note("replays: " + std::to_string(ok) + "/" + std::to_string(total) + " exact");
  res.seconds = detail::elapsed_s(t0);
  return res;
}

// --- oracle: line validator against the independent exactness oracle -------

inline SuiteResult suite_oracle(uint64_t seed) {
  SuiteResult res{"oracle"};
  auto t0 = std::chrono::steady_clock::now();
  const int total = 500;
  std::vector<int> bad(static_cast<size_t>(total), 0);
  parallel_for(static_cast<size_t>(total), [&](size_t i) {
    Rng rng(derive_seed(seed ^ 0x07ac1e00ull, i));
    RingSpec ring = (i % 3 == 0) ? RingSpec::localized_at(2) : RingSpec::integers();
    int r0, r1, r2;
    Matrix d1, d2;
    if (i % 2 == 0) {
      // exact by construction, occasionally corrupted afterwards
      int k0 = static_cast<int>(rng.uniform(0, 2));
      int k2 = static_cast<int>(rng.uniform(0, 2));
      r0 = k0;
      r1 = k0 + k2;
      r2 = k2;
      d1 = hstack(Matrix::identity(k0), Matrix(k0, k2));
      d2 = vstack(Matrix(k0, k2), Matrix::identity(k2));
      Matrix p0 = random_unimodular(rng, r0), p1 = random_unimodular(rng, r1),
             p2 = random_unimodular(rng, r2);
      d1 = p0 * d1 * *inverse_exact(p1);
      d2 = p1 * d2 * *inverse_exact(p2);
      if (rng.uniform(0, 3) == 0 && r1 > 0) {
        if (rng.coin() && r0 > 0)
          d1.at(static_cast<int>(rng.uniform(0, r0 - 1)),
                static_cast<int>(rng.uniform(0, r1 - 1))) += Scalar(rng.uniform(1, 2));
        else if (r2 > 0)
          d2.at(static_cast<int>(rng.uniform(0, r1 - 1)),
                static_cast<int>(rng.uniform(0, r2 - 1))) += Scalar(rng.uniform(1, 2));
      }
    } else {
      r0 = static_cast<int>(rng.uniform(0, 3));
      r1 = static_cast<int>(rng.uniform(0, 3));
      r2 = static_cast<int>(rng.uniform(0, 3));
      d1 = Matrix(r0, r1);
      d2 = Matrix(r1, r2);
      for (auto& e : d1.e) e = Scalar(rng.uniform(-3, 3));
      for (auto& e : d2.e) e = Scalar(rng.uniform(-3, 3));
    }
    BinaryMulticomplex c;
    c.ring = ring;
    c.dimension = 1;
    c.set_rank({0}, r0);
    c.set_rank({1}, r1);
    c.set_rank({2}, r2);
    c.set_diff_pair(1, {1}, d1);
    c.set_diff_pair(1, {2}, d2);
    bool engine = validate_multicomplex(c).pass;
    bool oracle = (d1 * d2).is_zero();
    if (oracle) {
      int rk1 = detail::oracle_rank(d1);
      int rk2 = detail::oracle_rank(d2);
      oracle = rk2 == r2 && rk1 == r0 && rk1 + rk2 == r1 &&
               all_units(invariant_factors(d1, ring), ring) &&
               all_units(invariant_factors(d2, ring), ring);
    }
    bad[i] = (engine != oracle) ? 1 : 0;
  });
  long agree = 0;
  for (int i = 0; i < total; ++i) {
    if (bad[static_cast<size_t>(i)] == 0)
      ++agree;
    else if (res.pass)
      res.fail("line " + std::to_string(i) + ": validator disagrees with the oracle");
  }
  if (agree != total) res.pass = false;
  res.counters["total"] = total;
  res.counters["agree"] = agree;
  res.note("agreement: " + std::to_string(agree) + "/" + std::to_string(total));
  res.seconds = detail::elapsed_s(t0);
  return res;
}

// --- tamper: single-entry mutations must never be accepted unless they
// land on another valid witness, which an independent audit must confirm ----

namespace detail {

// same identity battery as the verifier, recomputed through different
// compositions (transposed products, mutual-membership lattice comparison);
// classifies accepted mutants
inline bool audit_certificate(const Certificate& cert) {
  FormalSum want;
  want.add(cert.target_nu, 1);
  want.add(cert.target_zero, -1);
  const NilMulticomplex* tn = cert.registry.find(cert.target_nu);
  const NilMulticomplex* tz = cert.registry.find(cert.target_zero);
  if (!tn || !tz || !(cert.claim == want) || !(tn->base == tz->base) || !tz->nil_is_zero())
    return false;
  for (const auto& id : cert.registry.order)
    if (!validate_nil(*cert.registry.find(id)).pass) return false;
  auto tequal = [](const Matrix& a, const Matrix& b) {
    return a.transpose() == b.transpose();
  };
  const RingSpec& ring = cert.ring;
  for (const auto& step : cert.steps) {
    if (const auto* se = std::get_if<ShortExactStep>(&step)) {
      const NilMulticomplex* sub = cert.registry.find(se->sub);
      const NilMulticomplex* tot = cert.registry.find(se->total);
      const NilMulticomplex* quo = cert.registry.find(se->quotient);
      if (!sub || !tot || !quo) return false;
      for (const auto& x : tot->base.positions()) {
        int r = tot->base.rank_at(x), k = sub->base.rank_at(x), q = quo->base.rank_at(x);
        if (k + q != r) return false;
        auto fetch = [&](const std::map<MultiIndex, Matrix>& mm, int rr, int cc) {
          auto it = mm.find(x);
          return it == mm.end() ? Matrix(rr, cc) : it->second;
        };
        Matrix inc = fetch(se->inclusion, r, k);
        Matrix prj = fetch(se->projection, q, r);
        Matrix ret = fetch(se->retraction, k, r);
        if (inc.rows != r || inc.cols != k || prj.rows != q || prj.cols != r || ret.rows != k ||
            ret.cols != r)
          return false;
        if (!(inc.transpose() * ret.transpose()).is_identity()) return false;
        if (!(inc.transpose() * prj.transpose()).is_zero()) return false;
        if (static_cast<int>(invariant_factors(inc, ring).size()) != k ||
            !all_units(invariant_factors(inc, ring), ring))
          return false;
        if (static_cast<int>(invariant_factors(prj, ring).size()) != q ||
            !all_units(invariant_factors(prj, ring), ring))
          return false;
        // mutual membership instead of canonical-basis equality
        Lattice ker = kernel_saturated(prj, ring);
        if (!(prj * inc).is_zero()) return false;
        if (k > 0) {
          auto into = solve_exact(inc, ker.basis);
          if (!into || !entries_in_ring(*into, ring) || !(inc * *into == ker.basis)) return false;
        } else if (ker.rank() != 0) {
          return false;
        }
        if (!tequal(tot->nil_at(x) * inc, inc * sub->nil_at(x))) return false;
        if (!tequal(quo->nil_at(x) * prj, prj * tot->nil_at(x))) return false;
      }
      for (int dir = 1; dir <= tot->base.dimension; ++dir)
        for (int mem = 0; mem < 2; ++mem)
          for (const auto& x : tot->base.positions()) {
            if (x[static_cast<size_t>(dir - 1)] < 1) continue;
            MultiIndex y = step_down(x, dir);
            auto fetch = [&](const std::map<MultiIndex, Matrix>& mm, const MultiIndex& p, int rr,
                             int cc) {
              auto it = mm.find(p);
              return it == mm.end() ? Matrix(rr, cc) : it->second;
            };
            Member mb = static_cast<Member>(mem);
            Matrix inc_x = fetch(se->inclusion, x, tot->base.rank_at(x), sub->base.rank_at(x));
            Matrix inc_y = fetch(se->inclusion, y, tot->base.rank_at(y), sub->base.rank_at(y));
            Matrix prj_x = fetch(se->projection, x, quo->base.rank_at(x), tot->base.rank_at(x));
            Matrix prj_y = fetch(se->projection, y, quo->base.rank_at(y), tot->base.rank_at(y));
            if (!tequal(tot->base.diff_at(dir, mb, x) * inc_x,
                        inc_y * sub->base.diff_at(dir, mb, x)))
              return false;
            if (!tequal(quo->base.diff_at(dir, mb, x) * prj_x,
                        prj_y * tot->base.diff_at(dir, mb, x)))
              return false;
          }
    } else if (const auto* di = std::get_if<DiagonalStep>(&step)) {
      const NilMulticomplex* obj = cert.registry.find(di->object);
      if (!obj || !obj->nil_is_zero()) return false;
      if (di->direction < 1 || di->direction > obj->base.dimension) return false;
      for (const auto& x : obj->base.positions()) {
        if (x[static_cast<size_t>(di->direction - 1)] < 1) continue;
        if (!(obj->base.diff_at(di->direction, Member::D, x) ==
              obj->base.diff_at(di->direction, Member::DTilde, x)))
          return false;
      }
    } else {
      const auto& iso = std::get<IsomorphismStep>(step);
      const NilMulticomplex* lhs = cert.registry.find(iso.left);
      const NilMulticomplex* rhs = cert.registry.find(iso.right);
      if (!lhs || !rhs || lhs->base.dimension != rhs->base.dimension) return false;
      for (const auto& x : lhs->base.positions()) {
        int rl = lhs->base.rank_at(x), rr = rhs->base.rank_at(x);
        if (rl != rr) return false;
        auto it = iso.matrices.find(x);
        Matrix phi = it == iso.matrices.end() ? Matrix(rr, rl) : it->second;
        if (phi.rows != rr || phi.cols != rl) return false;
        if (rl == 0) continue;
        if (!entries_in_ring(phi, ring) || !is_unit(det_exact(phi), ring)) return false;
        if (!tequal(rhs->nil_at(x) * phi, phi * lhs->nil_at(x))) return false;
      }
      for (int dir = 1; dir <= lhs->base.dimension; ++dir)
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
            Member mb = static_cast<Member>(mem);
            if (!tequal(rhs->base.diff_at(dir, mb, x) * fetch(x),
                        fetch(y) * lhs->base.diff_at(dir, mb, x)))
              return false;
          }
    }
  }
  std::vector<FormalSum> rels;
  for (const auto& step : cert.steps) rels.push_back(step_contribution(step));
  return static_cast<bool>(formal_membership(cert.claim, rels));
}

using Mutator = std::function<void(Certificate&, const Scalar&)>;

inline std::vector<Mutator> mutation_sites(const Certificate& cert) {
  std::vector<Mutator> out;
  for (const auto& id : cert.registry.order) {
    const NilMulticomplex& obj = *cert.registry.find(id);
    for (const auto& [key, mat] : obj.base.diffs)
      for (int r = 0; r < mat.rows; ++r)
        for (int c = 0; c < mat.cols; ++c)
          out.push_back([id, key, r, c](Certificate& cc, const Scalar& d) {
            cc.registry.objects.at(id).base.diffs.at(key).at(r, c) += d;
          });
    for (const auto& [x, mat] : obj.nil)
      for (int r = 0; r < mat.rows; ++r)
        for (int c = 0; c < mat.cols; ++c)
          out.push_back([id, x, r, c](Certificate& cc, const Scalar& d) {
            cc.registry.objects.at(id).nil.at(x).at(r, c) += d;
          });
  }
  for (size_t si = 0; si < cert.steps.size(); ++si) {
    if (const auto* se = std::get_if<ShortExactStep>(&cert.steps[si])) {
      for (int which = 0; which < 3; ++which) {
        const auto& mm = which == 0 ? se->inclusion : which == 1 ? se->projection : se->retraction;
        for (const auto& [x, mat] : mm)
          for (int r = 0; r < mat.rows; ++r)
            for (int c = 0; c < mat.cols; ++c)
              out.push_back([si, which, x, r, c](Certificate& cc, const Scalar& d) {
                auto& step = std::get<ShortExactStep>(cc.steps[si]);
                auto& target =
                    which == 0 ? step.inclusion : which == 1 ? step.projection : step.retraction;
                target.at(x).at(r, c) += d;
              });
      }
    } else if (const auto* iso = std::get_if<IsomorphismStep>(&cert.steps[si])) {
      for (const auto& [x, mat] : iso->matrices)
        for (int r = 0; r < mat.rows; ++r)
          for (int c = 0; c < mat.cols; ++c)
            out.push_back([si, x, r, c](Certificate& cc, const Scalar& d) {
              std::get<IsomorphismStep>(cc.steps[si]).matrices.at(x).at(r, c) += d;
            });
    }
  }
  return out;
}

}  // namespace detail

inline SuiteResult suite_tamper(uint64_t seed) {
  SuiteResult res{"tamper"};
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Certificate> pool;
  {
    const RingSpec z = RingSpec::integers();
    for (int r : {3, 4, 5}) {
      Rng rng(derive_seed(seed ^ 0x7a300000ull, static_cast<uint64_t>(r)));
      auto out =
          reduce_nil_generator(nil_single(z, random_nilpotent(rng, r, z)), SplitStrategy::MaxIndex);
      if (auto* cert = std::get_if<Certificate>(&out)) pool.push_back(std::move(*cert));
    }
    {
      Rng rng(derive_seed(seed ^ 0x7a300000ull, 10));
      const RingSpec z5 = RingSpec::localized_at(5);
      auto out = reduce_nil_generator(nil_single(z5, random_nilpotent(rng, 4, z5)),
                                      SplitStrategy::MaxIndex);
      if (auto* cert = std::get_if<Certificate>(&out)) pool.push_back(std::move(*cert));
    }
    {
      BinaryMulticomplex c = random_acyclic_binary(derive_seed(seed ^ 0x7a300000ull, 11), 1, 2, 2, z);
      auto out = reduce_nil_generator(shift_nil(c), SplitStrategy::MaxIndex);
      if (auto* cert = std::get_if<Certificate>(&out)) pool.push_back(std::move(*cert));
    }
    {
      BinaryMulticomplex c = random_acyclic_binary(derive_seed(seed ^ 0x7a300000ull, 12), 1, 1, 2, z);
      auto out =
          reduce_nil_generator(shift_nil(add_diagonal_direction(c, 0)), SplitStrategy::MaxIndex);
      if (auto* cert = std::get_if<Certificate>(&out)) pool.push_back(std::move(*cert));
    }
  }
  if (pool.size() < 6) {
    res.fail("tamper pool incomplete: " + std::to_string(pool.size()) + "/6 certificates");
    res.seconds = detail::elapsed_s(t0);
    return res;
  }
  for (size_t p = 0; p < pool.size(); ++p)
    if (!verify_certificate(pool[p]).accepted) {
      res.fail("pool certificate " + std::to_string(p) + " does not verify before mutation");
      res.seconds = detail::elapsed_s(t0);
      return res;
    }

  const int total = 100;
  std::vector<int> outcome(static_cast<size_t>(total), 0);  // 0 reject, 1 preserved, 2 bad accept
  parallel_for(static_cast<size_t>(total), [&](size_t t) {
    Rng rng(derive_seed(seed ^ 0x7a300000ull, 100 + t));
    Certificate cert = pool[static_cast<size_t>(rng.uniform(0, static_cast<long>(pool.size()) - 1))];
    auto sites = detail::mutation_sites(cert);
    const auto& site = sites[static_cast<size_t>(rng.uniform(0, static_cast<long>(sites.size()) - 1))];
    const long deltas[] = {1, -1, 2, -2};
    site(cert, Scalar(deltas[rng.uniform(0, 3)]));
    Verdict v = verify_certificate(cert);
    if (!v.accepted) {
      outcome[t] = 0;
    } else {
      outcome[t] = detail::audit_certificate(cert) ? 1 : 2;
    }
  });
  long rejected = 0, preserved = 0, bad = 0;
  for (int t = 0; t < total; ++t) {
    if (outcome[static_cast<size_t>(t)] == 0) ++rejected;
    if (outcome[static_cast<size_t>(t)] == 1) ++preserved;
    if (outcome[static_cast<size_t>(t)] == 2) ++bad;
  }
  if (bad != 0) res.fail(std::to_string(bad) + " identity-changing mutations were accepted");
  res.counters["total"] = total;
  res.counters["rejected"] = rejected;
  res.counters["accepted_identity_preserving"] = preserved;
  res.counters["accepted_identity_changing"] = bad;
  std::ostringstream line;
  line << "mutations: " << total << ", rejected: " << rejected
       << ", accepted as alternative valid witnesses (independently audited): " << preserved
       << ", identity-changing accepted: " << bad;
  res.note(line.str());
  res.seconds = detail::elapsed_s(t0);
  return res;
}

inline std::vector<std::string> suite_names() {
  return {"nil0", "nil1", "nil2", "linalg", "oracle", "tamper"};
}

inline SuiteResult run_suite(const std::string& name, uint64_t seed) {
  if (name == "nil0") return suite_nil0(seed);
  if (name == "nil1") return suite_nil1(seed);
  if (name == "nil2") return suite_nil2(seed);
  if (name == "linalg") return suite_linalg(seed);
  if (name == "oracle") return suite_oracle(seed);
  if (name == "tamper") return suite_tamper(seed);
  throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace selftest
}  // namespace kwitness
