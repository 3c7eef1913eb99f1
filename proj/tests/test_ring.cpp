#include <catch2/catch_amalgamated.hpp>

#include "kwitness/ring.hpp"

using namespace kwitness;

TEST_CASE("scalars stay reduced with positive denominators") {
  Scalar s(BigInt(6), BigInt(-4));
  CHECK(s.num == -3);
  CHECK(s.den == 2);
  CHECK(Scalar(BigInt(0), BigInt(7)) == Scalar(0));
  CHECK(Scalar(BigInt(-10), BigInt(-5)) == Scalar(2));
  CHECK_THROWS_AS(Scalar(BigInt(1), BigInt(0)), std::domain_error);
}

TEST_CASE("scalar arithmetic is exact") {
  Scalar a(BigInt(1), BigInt(3)), b(BigInt(1), BigInt(6));
  CHECK(a + b == Scalar(BigInt(1), BigInt(2)));
  CHECK(a - b == b);
  CHECK(a * b == Scalar(BigInt(1), BigInt(18)));
  CHECK(a / b == Scalar(2));
  CHECK((-a) + a == Scalar(0));
  CHECK(a.str() == "1/3");
  CHECK(Scalar(-7).str() == "-7");
  Scalar acc(5);
  acc += Scalar(BigInt(1), BigInt(2));
  acc *= Scalar(2);
  acc -= Scalar(11);
  CHECK(acc == Scalar(0));
}

TEST_CASE("egcd returns a Bezout certificate with nonnegative gcd") {
  const long vals[] = {0, 1, -1, 6, -6, 35, 12, -35};
  for (long a : vals)
    for (long b : vals) {
      if (a == 0 && b == 0) continue;
      Egcd e = egcd(BigInt(a), BigInt(b));
      CHECK(e.g == big_gcd(big_abs(BigInt(a)), big_abs(BigInt(b))));
      CHECK(e.x * a + e.y * b == e.g);
      CHECK(e.g > 0);
    }
}

TEST_CASE("integer helpers") {
  CHECK(floor_div(BigInt(7), BigInt(2)) == 3);
  CHECK(floor_div(BigInt(-7), BigInt(2)) == -4);
  CHECK(floor_div(BigInt(7), BigInt(-2)) == -4);
  CHECK(big_pow(BigInt(3), 4) == 81);
  CHECK(p_valuation(BigInt(200), BigInt(5)) == 2);
  CHECK(p_valuation(BigInt(7), BigInt(5)) == 0);
  CHECK((inv_mod(BigInt(3), BigInt(25)) * 3) % 25 == 1);
}

TEST_CASE("primality screen") {
  for (long p : {2, 3, 5, 7, 97, 101}) CHECK(is_prime(BigInt(p)));
  for (long n : {0, 1, 4, 6, 91, 100}) CHECK_FALSE(is_prime(BigInt(n)));
}

TEST_CASE("ring membership over Z and a localization") {
  RingSpec z = RingSpec::integers();
  RingSpec z5 = RingSpec::localized_at(5);
  CHECK(z.name() == "Z");
  CHECK(z5.name() == "Z_(5)");
  CHECK_THROWS_AS(RingSpec::localized_at(6), std::invalid_argument);

  CHECK(scalar_in_ring(Scalar(3), z));
  CHECK_FALSE(scalar_in_ring(Scalar(BigInt(1), BigInt(2)), z));
  CHECK(scalar_in_ring(Scalar(BigInt(1), BigInt(2)), z5));
  CHECK(scalar_in_ring(Scalar(BigInt(7), BigInt(3)), z5));
  CHECK_FALSE(scalar_in_ring(Scalar(BigInt(1), BigInt(5)), z5));
  CHECK_FALSE(scalar_in_ring(Scalar(BigInt(3), BigInt(10)), z5));
}

TEST_CASE("units, valuation, canonical associates, divisibility") {
  RingSpec z = RingSpec::integers();
  RingSpec z5 = RingSpec::localized_at(5);

  CHECK(is_unit(Scalar(1), z));
  CHECK(is_unit(Scalar(-1), z));
  CHECK_FALSE(is_unit(Scalar(2), z));
  CHECK_FALSE(is_unit(Scalar(0), z));
  CHECK(is_unit(Scalar(2), z5));
  CHECK(is_unit(Scalar(BigInt(-3), BigInt(7)), z5));
  CHECK_FALSE(is_unit(Scalar(5), z5));
  CHECK_FALSE(is_unit(Scalar(BigInt(10), BigInt(3)), z5));

  CHECK(valuation(Scalar(50), BigInt(5)) == 2);
  CHECK(valuation(Scalar(BigInt(1), BigInt(5)), BigInt(5)) == -1);
  CHECK(valuation(Scalar(BigInt(3), BigInt(4)), BigInt(5)) == 0);

  auto [cz, uz] = canonical_associate(Scalar(-6), z);
  CHECK(cz == Scalar(6));
  CHECK(uz * Scalar(-6) == cz);
  auto [c5, u5] = canonical_associate(Scalar(BigInt(50), BigInt(3)), z5);
  CHECK(c5 == Scalar(25));
  CHECK(u5 * Scalar(BigInt(50), BigInt(3)) == c5);
  CHECK(is_unit(u5, z5));
  CHECK_THROWS_AS(canonical_associate(Scalar(0), z), std::invalid_argument);

  CHECK(divides(Scalar(2), Scalar(6), z));
  CHECK_FALSE(divides(Scalar(4), Scalar(6), z));
  CHECK(divides(Scalar(0), Scalar(0), z));
  CHECK_FALSE(divides(Scalar(0), Scalar(3), z));
  CHECK(divides(Scalar(2), Scalar(3), z5));
  CHECK(divides(Scalar(5), Scalar(25), z5));
  CHECK_FALSE(divides(Scalar(25), Scalar(5), z5));
}
