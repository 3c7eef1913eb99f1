#include <catch2/catch_amalgamated.hpp>

#include "kwitness/corpus.hpp"
#include "kwitness/nil.hpp"

using namespace kwitness;

namespace {

Matrix mat(int rows, int cols, std::initializer_list<long long> vals) {
  Matrix m(rows, cols);
  auto it = vals.begin();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = Scalar(*it++);
  return m;
}

// 0 <- R^1 <- R^2 <- R^1 <- 0 with nu supported on the middle position;
// the commutant forces nu_1 strictly upper triangular in this basis
NilMulticomplex middle_nil(long long beta) {
  BinaryMulticomplex c;
  c.ring = RingSpec::integers();
  c.dimension = 1;
  c.set_rank({0}, 1);
  c.set_rank({1}, 2);
  c.set_rank({2}, 1);
  c.set_diff_pair(1, {1}, mat(1, 2, {0, 1}));
  c.set_diff_pair(1, {2}, mat(2, 1, {1, 0}));
  NilMulticomplex n{c, {}};
  n.set_nil({1}, mat(2, 2, {0, beta, 0, 0}));
  return n;
}

}  // namespace

TEST_CASE("nil validation layers its checks on the base report") {
  const RingSpec z = RingSpec::integers();

  NilMulticomplex good = nil_single(z, mat(2, 2, {0, 1, 0, 0}));
  CHECK(validate_nil(good).pass);

  NilMulticomplex shape = good;
  shape.nil[{}] = mat(1, 2, {0, 1});
  auto rep = validate_nil(shape);
  CHECK_FALSE(rep.pass);
  CHECK(rep.has_kind(FailKind::NilShape));

  NilMulticomplex loop = nil_single(z, Matrix::identity(2));
  auto rep2 = validate_nil(loop);
  CHECK_FALSE(rep2.pass);
  CHECK(rep2.has_kind(FailKind::NilNilpotency));

  NilMulticomplex skew = middle_nil(1);
  skew.set_nil({1}, mat(2, 2, {0, 0, 1, 0}));  // pushes against the differential
  auto rep3 = validate_nil(skew);
  CHECK_FALSE(rep3.pass);
  CHECK(rep3.has_kind(FailKind::NilCommutation));

  CHECK(validate_nil(middle_nil(3)).pass);
}

TEST_CASE("nilpotency indices count powers exactly") {
  const RingSpec z = RingSpec::integers();
  Matrix j3(3, 3);
  j3.at(0, 1) = Scalar(1);
  j3.at(1, 2) = Scalar(1);
  auto idx = nil_index(nil_single(z, j3));
  CHECK(idx.max_index == 3);
  CHECK(idx.min_index == 3);
  CHECK(idx.local.at({}) == 3);

  auto zero = nil_index(nil_single(z, Matrix(2, 2)));
  CHECK(zero.max_index == 1);
  CHECK(zero.min_index == 1);

  CHECK_THROWS_AS(nil_index(nil_single(z, Matrix::identity(1))), NotNilpotentError);

  // rank-0 positions carry local index 0 and do not drag the minimum down
  NilMulticomplex m = middle_nil(1);
  m.base.set_rank({2}, 0);
  m.base.set_diff(1, Member::D, {2}, Matrix(2, 0));
  m.base.set_diff(1, Member::DTilde, {2}, Matrix(2, 0));
  auto mixed = nil_index(m);
  CHECK(mixed.local.at({2}) == 0);
  CHECK(mixed.max_index == 2);
  CHECK(mixed.min_index == 1);  // the zero endomorphism at position 0
}

TEST_CASE("kernel filtration freezes the expected chain") {
  const RingSpec z = RingSpec::integers();
  NilMulticomplex n = nil_single(z, mat(2, 2, {0, 2, 0, 0}));
  Filtration f = kernel_filtration(n);
  CHECK(f.max_index == 2);
  const auto& chain = f.layers.at(MultiIndex{});
  REQUIRE(chain.size() == 2);
  CHECK(chain[0].basis == mat(2, 1, {1, 0}));
  CHECK(chain[1].rank() == 2);
}

TEST_CASE("splitting the top filtration layer of a single endomorphism") {
  const RingSpec z = RingSpec::integers();
  NilMulticomplex n = nil_single(z, mat(2, 2, {0, 2, 0, 0}));
  auto out = layer_split(n, SplitStrategy::MaxIndex);
  auto* layer = std::get_if<FiltrationLayer>(&out);
  REQUIRE(layer != nullptr);
  CHECK(layer->exponent == 1);
  CHECK(layer->sub.base.rank_at({}) == 1);
  CHECK(layer->sub.nil_is_zero());
  CHECK(layer->quotient.base.rank_at({}) == 1);
  CHECK(layer->quotient.nil_is_zero());
  const Lattice& k = layer->kernels.at({});
  CHECK(k.basis == mat(2, 1, {1, 0}));
  const Splitting& sp = layer->splittings.at({});
  CHECK((sp.retraction * k.basis).is_identity());
  CHECK((sp.projection * sp.complement).is_identity());
  CHECK((sp.retraction * sp.complement).is_zero());
}

TEST_CASE("layer split rejects endomorphisms that are already flat") {
  const RingSpec z = RingSpec::integers();
  CHECK_THROWS_AS(layer_split(nil_single(z, Matrix(2, 2)), SplitStrategy::MaxIndex),
                  std::invalid_argument);
}

TEST_CASE("side-condition failures carry their diagnosis") {
  NilMulticomplex n = middle_nil(1);
  REQUIRE(validate_nil(n).pass);
  REQUIRE(nil_index(n).max_index == 2);

  auto max_out = layer_split(n, SplitStrategy::MaxIndex);
  auto* fail = std::get_if<SplitFailure>(&max_out);
  REQUIRE(fail != nullptr);
  CHECK(fail->strategy == SplitStrategy::MaxIndex);
  CHECK(fail->exponent == 1);
  CHECK(fail->where == "sub");
  CHECK_FALSE(fail->details.empty());

  // the minimum local index here is 1, so the alternative strategy
  // degenerates before it can split anything
  auto min_out = layer_split(n, SplitStrategy::PaperMinIndex);
  auto* fail2 = std::get_if<SplitFailure>(&min_out);
  REQUIRE(fail2 != nullptr);
  CHECK(fail2->exponent == 0);
  CHECK(fail2->where == "exponent");
}

TEST_CASE("strategy names round-trip") {
  CHECK(strategy_name(SplitStrategy::MaxIndex) == std::string("max-index"));
  CHECK(strategy_name(SplitStrategy::PaperMinIndex) == std::string("paper-min-index"));
  CHECK(strategy_from_name("max-index") == SplitStrategy::MaxIndex);
  CHECK(strategy_from_name("paper-min-index") == SplitStrategy::PaperMinIndex);
  CHECK_THROWS_AS(strategy_from_name("greedy"), std::invalid_argument);
}

TEST_CASE("shift endomorphisms square to zero on the doubled complex") {
  BinaryMulticomplex c = random_acyclic_binary(7, 1, 3, 2, RingSpec::integers());
  NilMulticomplex n = shift_nil(c);
  CHECK(validate_nil(n).pass);
  auto idx = nil_index(n);
  CHECK(idx.max_index == 2);
  for (const auto& x : n.base.positions()) {
    int r = n.base.rank_at(x);
    if (r == 0) continue;
    CHECK(n.base.rank_at(x) == 2 * c.rank_at(x));
    Matrix nu = n.nil_at(x);
    CHECK((nu * nu).is_zero());
    CHECK_FALSE(nu.is_zero());
  }
}

TEST_CASE("commutant samples commute, stay nilpotent, and shape the middle") {
  NilMulticomplex probe = middle_nil(1);
  auto fam = commutant_nilpotent_sample(probe.base, 99, 12);
  REQUIRE_FALSE(fam.empty());
  CHECK(fam.front().nil_is_zero());
  bool any_nonzero = false;
  for (const auto& n : fam) {
    CHECK(validate_nil(n).pass);
    CHECK(n.nil_at({0}).is_zero());
    CHECK(n.nil_at({2}).is_zero());
    Matrix nu1 = n.nil_at({1});
    CHECK(nu1.at(0, 0).is_zero());
    CHECK(nu1.at(1, 0).is_zero());
    CHECK(nu1.at(1, 1).is_zero());
    if (!n.nil_is_zero()) any_nonzero = true;
  }
  CHECK(any_nonzero);

  CHECK(commutant_nilpotent_sample(probe.base, 99, 0).empty());
  auto one = commutant_nilpotent_sample(probe.base, 99, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.front().nil_is_zero());
}
