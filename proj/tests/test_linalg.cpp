#include <catch2/catch_amalgamated.hpp>

#include "kwitness/corpus.hpp"
#include "kwitness/linalg.hpp"

using namespace kwitness;

namespace {

Matrix mat(int rows, int cols, std::initializer_list<long long> vals) {
  Matrix m(rows, cols);
  auto it = vals.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = Scalar(*it++);
  return m;
}

Matrix random_entries(Rng& rng, int rows, int cols, long bound) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = Scalar(rng.uniform(-bound, bound));
  return m;
}

}  // namespace

TEST_CASE("row hermite form of a small integer matrix") {
  const RingSpec z = RingSpec::integers();
  Matrix m = mat(2, 2, {2, 4, 1, 3});
  auto res = hnf(m, z);
  CHECK(res.h == mat(2, 2, {1, 1, 0, 2}));
  CHECK(res.pivot_cols == std::vector<int>{0, 1});
  CHECK(res.rank() == 2);
  CHECK(res.u * m == res.h);
  CHECK(is_unit(det_exact(res.u), z));
  CHECK(hnf_is_canonical(res.h, res.pivot_cols, z));
}

TEST_CASE("hermite form rejects entries outside the ring") {
  Matrix m(1, 1);
  m.at(0, 0) = Scalar(1, 2);
  CHECK_THROWS_AS(hnf(m, RingSpec::integers()), std::invalid_argument);
  CHECK_NOTHROW(hnf(m, RingSpec::localized_at(3)));
}

TEST_CASE("smith form produces the divisibility chain") {
  const RingSpec z = RingSpec::integers();
  Matrix m = mat(2, 2, {2, 0, 0, 3});
  auto s = snf(m, z);
  REQUIRE(s.rank == 2);
  CHECK(s.d.at(0, 0) == Scalar(1));
  CHECK(s.d.at(1, 1) == Scalar(6));
  CHECK(s.u * m * s.v == s.d);
  CHECK(is_unit(det_exact(s.u), z));
  CHECK(is_unit(det_exact(s.v), z));
}

TEST_CASE("smith form over a localization only sees the prime") {
  const RingSpec z5 = RingSpec::localized_at(5);
  auto s = snf(mat(2, 2, {2, 0, 0, 3}), z5);
  REQUIRE(s.rank == 2);
  CHECK(s.d.at(0, 0) == Scalar(1));
  CHECK(s.d.at(1, 1) == Scalar(1));
  auto t = snf(mat(2, 2, {10, 0, 0, 15}), z5);
  REQUIRE(t.rank == 2);
  CHECK(t.d.at(0, 0) == Scalar(5));
  CHECK(t.d.at(1, 1) == Scalar(5));
}

TEST_CASE("invariant factors and unit detection") {
  const RingSpec z = RingSpec::integers();
  auto fs = invariant_factors(mat(2, 3, {2, 4, 4, -6, 6, 12}), z);
  REQUIRE(fs.size() == 2);
  CHECK(fs[0] == Scalar(2));
  CHECK(fs[1] == Scalar(6));
  CHECK_FALSE(all_units(fs, z));
  CHECK(all_units(invariant_factors(Matrix::identity(3), z), z));
}

TEST_CASE("kernel lattices are saturated and canonical") {
  const RingSpec z = RingSpec::integers();
  Lattice k1 = kernel_saturated(mat(1, 2, {1, 1}), z);
  REQUIRE(k1.rank() == 1);
  CHECK(k1.basis == mat(2, 1, {1, -1}));

  // scaling the map does not change the saturated kernel
  Lattice k2 = kernel_saturated(mat(1, 2, {2, 2}), z);
  CHECK(lattice_equal(k1, k2));

  Lattice full = kernel_saturated(Matrix::zero(1, 3), z);
  CHECK(full.rank() == 3);
  Lattice none = kernel_saturated(Matrix::identity(3), z);
  CHECK(none.rank() == 0);
}

TEST_CASE("membership returns exact coordinates or nothing") {
  const RingSpec z = RingSpec::integers();
  Lattice L = kernel_saturated(mat(1, 2, {1, 1}), z);
  auto c = membership(mat(2, 1, {3, -3}), L, z);
  REQUIRE(c.has_value());
  CHECK(*c == mat(1, 1, {3}));
  CHECK(L.basis * *c == mat(2, 1, {3, -3}));
  CHECK_FALSE(membership(mat(2, 1, {1, 1}), L, z).has_value());

  Lattice none{2, Matrix(2, 0)};
  CHECK(membership(mat(2, 1, {0, 0}), none, z).has_value());
  CHECK_FALSE(membership(mat(2, 1, {1, 0}), none, z).has_value());
  CHECK_THROWS_AS(membership(mat(3, 1, {0, 0, 0}), L, z), std::invalid_argument);
}

TEST_CASE("splitting a coordinate axis gives the obvious projections") {
  const RingSpec z = RingSpec::integers();
  Lattice L{2, mat(2, 1, {1, 0})};
  auto sp = split_saturated_inclusion(L, z);
  CHECK(sp.retraction == mat(1, 2, {1, 0}));
  CHECK(sp.complement == mat(2, 1, {0, 1}));
  CHECK(sp.projection == mat(1, 2, {0, 1}));
}

TEST_CASE("splitting refuses non-saturated inclusions") {
  Lattice L{2, mat(2, 1, {2, 0})};
  CHECK_THROWS_AS(split_saturated_inclusion(L, RingSpec::integers()), NotSaturatedError);
  // over Z_(3) the entry 2 is a unit, so the same lattice splits
  auto sp = split_saturated_inclusion(L, RingSpec::localized_at(3));
  CHECK((sp.retraction * L.basis).is_identity());
}

TEST_CASE("right inverses exist exactly for split surjections") {
  const RingSpec z = RingSpec::integers();
  CHECK_FALSE(right_inverse(mat(1, 1, {2}), z).has_value());
  auto r = right_inverse(mat(1, 1, {2}), RingSpec::localized_at(3));
  REQUIRE(r.has_value());
  CHECK(r->at(0, 0) == Scalar(1, 2));
  auto r2 = right_inverse(mat(1, 2, {1, 1}), z);
  REQUIRE(r2.has_value());
  CHECK((mat(1, 2, {1, 1}) * *r2).is_identity());
  CHECK_FALSE(right_inverse(mat(2, 1, {1, 0}), z).has_value());
}

TEST_CASE("gcd combos certify themselves") {
  const RingSpec z = RingSpec::integers();
  const RingSpec z5 = RingSpec::localized_at(5);
  for (long long a : {0, 1, -1, 6, -6, 35}) {
    for (long long b : {0, 1, -1, 6, 14, -35}) {
      if (a == 0 && b == 0) continue;
      for (const RingSpec& ring : {z, z5}) {
        auto g = detail::ring_gcd(Scalar(a), Scalar(b), ring);
        CHECK(g.x * Scalar(a) + g.y * Scalar(b) == g.g);
        CHECK(divides(g.g, Scalar(a), ring));
        CHECK(divides(g.g, Scalar(b), ring));
      }
      // a | b must leave the pivot row untouched
      if (a != 0 && b % a == 0) {
        auto g = detail::ring_gcd(Scalar(a), Scalar(b), z);
        CHECK(g.y == Scalar(0));
      }
    }
  }
}

TEST_CASE("normal form postconditions replay on random instances") {
  const std::vector<RingSpec> rings = {RingSpec::integers(), RingSpec::localized_at(2),
                                       RingSpec::localized_at(3), RingSpec::localized_at(5)};
  for (uint64_t i = 0; i < 120; ++i) {
    Rng rng(derive_seed(0x11a7u, i));
    const RingSpec& ring = rings[i % rings.size()];
    int rows = static_cast<int>(rng.uniform(1, 5));
    int cols = static_cast<int>(rng.uniform(1, 5));
    Matrix m = random_entries(rng, rows, cols, 9);
    CAPTURE(i, ring.name());

    auto h = hnf(m, ring);
    REQUIRE(h.u * m == h.h);
    REQUIRE(is_unit(det_exact(h.u), ring));
    REQUIRE(hnf_is_canonical(h.h, h.pivot_cols, ring));
    REQUIRE(h.rank() == rank_exact(m));

    auto s = snf(m, ring);
    REQUIRE(s.u * m * s.v == s.d);
    REQUIRE(is_unit(det_exact(s.u), ring));
    REQUIRE(is_unit(det_exact(s.v), ring));
    REQUIRE(s.rank == rank_exact(m));
    for (int a = 0; a + 1 < s.rank; ++a)
      REQUIRE(divides(s.d.at(a, a), s.d.at(a + 1, a + 1), ring));

    Lattice ker = kernel_saturated(m, ring);
    REQUIRE(ker.rank() == cols - s.rank);
    REQUIRE((m * ker.basis).is_zero());

    if (ker.rank() > 0) {
      Matrix coeff = random_entries(rng, ker.rank(), 1, 3);
      auto back = membership(ker.basis * coeff, ker, ring);
      REQUIRE(back.has_value());
      REQUIRE(*back == coeff);
      auto sp = split_saturated_inclusion(ker, ring);
      REQUIRE((sp.retraction * ker.basis).is_identity());
      REQUIRE((sp.projection * sp.complement).is_identity());
      REQUIRE((sp.retraction * sp.complement).is_zero());
      REQUIRE((sp.projection * ker.basis).is_zero());
      REQUIRE(is_unit(det_exact(hstack(ker.basis, sp.complement)), ring));
    }
  }
}

TEST_CASE("integer invariant factors localize coherently") {
  for (uint64_t i = 0; i < 40; ++i) {
    Rng rng(derive_seed(0x10cau, i));
    int n = static_cast<int>(rng.uniform(1, 4));
    Matrix m = random_entries(rng, n, n, 6);
    auto fz = invariant_factors(m, RingSpec::integers());
    for (long long p : {2, 3, 5}) {
      const RingSpec zp = RingSpec::localized_at(p);
      auto fp = invariant_factors(m, zp);
      REQUIRE(fp.size() == fz.size());
      for (size_t k = 0; k < fz.size(); ++k) {
        CAPTURE(i, p, k);
        REQUIRE(valuation(fp[k], p) == valuation(fz[k], p));
      }
    }
  }
}
