#include <catch2/catch_amalgamated.hpp>

#include "kwitness/corpus.hpp"
#include "kwitness/multicomplex.hpp"
#include "kwitness/selftest.hpp"

using namespace kwitness;

namespace {

Matrix mat(int rows, int cols, std::initializer_list<long long> vals) {
  Matrix m(rows, cols);
  auto it = vals.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = Scalar(*it++);
  return m;
}

// 0 <- R^1 <- R^2 <- R^1 <- 0, exact, both members equal
BinaryMulticomplex three_term_line(const RingSpec& ring) {
  BinaryMulticomplex c;
  c.ring = ring;
  c.dimension = 1;
  c.set_rank({0}, 1);
  c.set_rank({1}, 2);
  c.set_rank({2}, 1);
  c.set_diff_pair(1, {1}, mat(1, 2, {0, 1}));
  c.set_diff_pair(1, {2}, mat(2, 1, {1, 0}));
  return c;
}

}  // namespace

TEST_CASE("an exact three-term line validates with replayable witnesses") {
  const RingSpec z = RingSpec::integers();
  BinaryMulticomplex c = three_term_line(z);
  auto rep = validate_multicomplex(c);
  REQUIRE(rep.pass);
  REQUIRE(rep.witnesses.size() == 2);  // one per member on the single line
  for (int mem = 0; mem < 2; ++mem) {
    auto it = rep.witnesses.find({1, mem, MultiIndex{0}});
    REQUIRE(it != rep.witnesses.end());
    const AcyclicityWitness& w = it->second;
    Matrix d1 = c.diff_at(1, static_cast<Member>(mem), {1});
    Matrix d2 = c.diff_at(1, static_cast<Member>(mem), {2});
    CHECK((d1 * w.z1.basis).is_zero());
    CHECK(w.z1.basis * w.im_coords == d2);
    CHECK(all_units(invariant_factors(w.im_coords, z), z));
    CHECK((d1 * w.right_inv).is_identity());
  }
}

TEST_CASE("acyclicity is a statement about the ring") {
  BinaryMulticomplex c;
  c.dimension = 1;
  c.set_rank({0}, 1);
  c.set_rank({1}, 1);
  c.set_diff_pair(1, {1}, mat(1, 1, {2}));

  c.ring = RingSpec::integers();
  auto over_z = validate_multicomplex(c);
  CHECK_FALSE(over_z.pass);
  CHECK(over_z.has_kind(FailKind::Acyclicity));

  c.ring = RingSpec::localized_at(3);
  CHECK(validate_multicomplex(c).pass);
}

TEST_CASE("nonzero composites are reported per member") {
  BinaryMulticomplex c;
  c.ring = RingSpec::integers();
  c.dimension = 1;
  for (int i = 0; i < 3; ++i) c.set_rank({i}, 1);
  c.set_diff_pair(1, {1}, mat(1, 1, {1}));
  c.set_diff_pair(1, {2}, mat(1, 1, {1}));
  auto rep = validate_multicomplex(c);
  CHECK_FALSE(rep.pass);
  CHECK(rep.has_kind(FailKind::Composite));
  CHECK_FALSE(rep.has_kind(FailKind::Acyclicity));  // exactness is not judged on broken lines
}

TEST_CASE("differentials in different directions must commute") {
  BinaryMulticomplex c;
  c.ring = RingSpec::integers();
  c.dimension = 2;
  c.set_rank({0, 0}, 1);
  c.set_rank({1, 0}, 1);
  c.set_rank({0, 1}, 1);
  c.set_rank({1, 1}, 1);
  c.set_diff_pair(1, {1, 0}, mat(1, 1, {1}));
  c.set_diff_pair(1, {1, 1}, mat(1, 1, {1}));
  c.set_diff_pair(2, {1, 1}, mat(1, 1, {1}));
  c.set_diff_pair(2, {0, 1}, mat(1, 1, {2}));
  auto rep = validate_multicomplex(c);
  CHECK_FALSE(rep.pass);
  CHECK(rep.has_kind(FailKind::Commutation));
}

TEST_CASE("shape defects short-circuit the semantic checks") {
  BinaryMulticomplex c;
  c.ring = RingSpec::integers();
  c.dimension = 1;
  c.set_rank({0}, 1);
  c.set_rank({1}, 1);
  c.set_diff(1, Member::D, {1}, mat(2, 1, {1, 0}));  // wrong target rank
  auto rep = validate_multicomplex(c);
  CHECK_FALSE(rep.pass);
  CHECK(rep.has_kind(FailKind::Shape));
  for (const auto& f : rep.failures) CHECK(f.kind == FailKind::Shape);
}

TEST_CASE("delta embedding overwrites the second member with the first") {
  BinaryMulticomplex c = three_term_line(RingSpec::integers());
  c.set_diff(1, Member::DTilde, {2}, mat(2, 1, {-1, 0}));
  REQUIRE(validate_multicomplex(c).pass);
  CHECK(diagonal_directions(c).empty());

  BinaryMulticomplex e = delta_embed(c, 1);
  CHECK(diagonal_directions(e) == std::vector<int>{1});
  CHECK(e.diff_at(1, Member::DTilde, {2}) == mat(2, 1, {1, 0}));
  CHECK(validate_multicomplex(e).pass);
  CHECK_THROWS_AS(delta_embed(c, 2), std::invalid_argument);
}

TEST_CASE("adding a diagonal direction raises the dimension") {
  BinaryMulticomplex c = three_term_line(RingSpec::integers());
  BinaryMulticomplex d = add_diagonal_direction(c, 0);
  CHECK(d.dimension == 2);
  CHECK(d.rank_at({1, 0}) == 2);
  CHECK(d.rank_at({1, 1}) == 2);
  CHECK(d.rank_at({1, 2}) == 0);
  CHECK(d.diff_at(2, Member::D, {1, 1}).is_identity());
  CHECK(d.diff_at(2, Member::DTilde, {1, 1}).is_identity());
  CHECK(validate_multicomplex(d).pass);
  CHECK(diagonal_directions(d) == std::vector<int>{1, 2});
  CHECK_THROWS_AS(add_diagonal_direction(c, 2), std::invalid_argument);
}

TEST_CASE("direct sums add ranks blockwise") {
  BinaryMulticomplex a = three_term_line(RingSpec::integers());
  BinaryMulticomplex s = direct_sum(a, a);
  CHECK(s.rank_at({0}) == 2);
  CHECK(s.rank_at({1}) == 4);
  CHECK(s.diff_at(1, Member::D, {1}) ==
        block_diag(mat(1, 2, {0, 1}), mat(1, 2, {0, 1})));
  CHECK(validate_multicomplex(s).pass);

  BinaryMulticomplex other = three_term_line(RingSpec::localized_at(2));
  CHECK_THROWS_AS(direct_sum(a, other), DimensionMismatchError);
  BinaryMulticomplex two = add_diagonal_direction(a, 0);
  CHECK_THROWS_AS(direct_sum(a, two), DimensionMismatchError);
}

TEST_CASE("the random corpus is deterministic and valid") {
  const RingSpec z = RingSpec::integers();
  BinaryMulticomplex a = random_acyclic_binary(42, 2, 3, 2, z);
  BinaryMulticomplex b = random_acyclic_binary(42, 2, 3, 2, z);
  CHECK(a == b);
  CHECK_FALSE(a == random_acyclic_binary(43, 2, 3, 2, z));

  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u})
    for (int dim = 0; dim <= 2; ++dim) {
      CAPTURE(seed, dim);
      auto c = random_acyclic_binary(seed, dim, 3, 2,
                                     dim == 1 ? RingSpec::localized_at(2) : z);
      REQUIRE(validate_multicomplex(c).pass);
    }
  CHECK_THROWS_AS(random_acyclic_binary(1, 3, 3, 2, z), std::invalid_argument);
}

TEST_CASE("line verdicts agree with a rank oracle on random inputs") {
  for (uint64_t i = 0; i < 40; ++i) {
    Rng rng(derive_seed(0x0acc7eull, i));
    const RingSpec ring = (i % 3 == 0) ? RingSpec::localized_at(2) : RingSpec::integers();
    int r0 = static_cast<int>(rng.uniform(0, 3));
    int r1 = static_cast<int>(rng.uniform(0, 3));
    int r2 = static_cast<int>(rng.uniform(0, 3));
    Matrix d1(r0, r1), d2(r1, r2);
    for (int r = 0; r < r0; ++r)
      for (int c = 0; c < r1; ++c) d1.at(r, c) = Scalar(rng.uniform(-3, 3));
    for (int r = 0; r < r1; ++r)
      for (int c = 0; c < r2; ++c) d2.at(r, c) = Scalar(rng.uniform(-3, 3));

    BinaryMulticomplex c;
    c.ring = ring;
    c.dimension = 1;
    c.set_rank({0}, r0);
    c.set_rank({1}, r1);
    c.set_rank({2}, r2);
    c.set_diff_pair(1, {1}, d1);
    c.set_diff_pair(1, {2}, d2);

    bool verdict = validate_multicomplex(c).pass;
    int rk1 = selftest::detail::oracle_rank(d1);
    int rk2 = selftest::detail::oracle_rank(d2);
    bool oracle = (d1 * d2).is_zero() && rk2 == r2 && rk1 == r0 && rk1 + rk2 == r1 &&
                  all_units(invariant_factors(d1, ring), ring) &&
                  all_units(invariant_factors(d2, ring), ring);
    CAPTURE(i, ring.name(), r0, r1, r2);
    REQUIRE(verdict == oracle);
  }
}
