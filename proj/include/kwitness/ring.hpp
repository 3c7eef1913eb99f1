#pragma once

// Exact scalars over the rationals, tagged ring semantics for Z and for Z
// localized at a prime p (fractions with denominator coprime to p).

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace kwitness {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt big_abs(const BigInt& a) { return a < 0 ? BigInt(-a) : a; }

inline BigInt big_gcd(const BigInt& a, const BigInt& b) {
  return boost::multiprecision::gcd(a, b);
}

inline BigInt big_pow(const BigInt& b, unsigned long e) {
  return boost::multiprecision::pow(b, e);
}

// floor(a/b), b > 0. cpp_int division truncates toward zero.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if (q * b != a && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Egcd {
  BigInt g, x, y;  // g = gcd(|a|,|b|) >= 0, x*a + y*b = g
};

inline Egcd egcd(const BigInt& a, const BigInt& b) {
  BigInt r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    BigInt q = r0 / r1;
    r0 -= q * r1;
    std::swap(r0, r1);
    s0 -= q * s1;
    std::swap(s0, s1);
    t0 -= q * t1;
    std::swap(t0, t1);
  }
  if (r0 < 0) {
    r0 = -r0;
    s0 = -s0;
    t0 = -t0;
  }
  return {r0, s0, t0};
}

// trial division; intended for the small primes instances actually use
inline bool is_prime(const BigInt& n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (BigInt d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

// v_p(n) for n != 0
inline long p_valuation(BigInt n, const BigInt& p) {
  if (n == 0) throw std::invalid_argument("p_valuation: zero has no valuation");
  long v = 0;
  n = big_abs(n);
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

// inverse of a modulo m, for gcd(a, m) = 1, in [0, m)
inline BigInt inv_mod(const BigInt& a, const BigInt& m) {
  Egcd e = egcd(a, m);
  if (e.g != 1) throw std::invalid_argument("inv_mod: not invertible");
  BigInt r = e.x % m;
  if (r < 0) r += m;
  return r;
}

struct RingSpec {
  enum class Kind { Integers, LocalizedIntegers };
  Kind kind = Kind::Integers;
  BigInt prime = 0;  // set iff kind == LocalizedIntegers

  static RingSpec integers() { return RingSpec{}; }

  static RingSpec localized_at(BigInt p) {
    if (!is_prime(p)) throw std::invalid_argument("localized_at: " + p.str() + " is not prime");
    return RingSpec{Kind::LocalizedIntegers, std::move(p)};
  }

  bool is_local() const { return kind == Kind::LocalizedIntegers; }

  bool operator==(const RingSpec&) const = default;

  std::string name() const {
    return is_local() ? "Z_(" + prime.str() + ")" : "Z";
  }
};

// Always-reduced fraction: den > 0, gcd(num, den) = 1, zero is 0/1.
struct Scalar {
  BigInt num{0};
  BigInt den{1};

  Scalar() = default;
  Scalar(long long v) : num(v) {}
  Scalar(BigInt v) : num(std::move(v)) {}
  Scalar(BigInt n, BigInt d) : num(std::move(n)), den(std::move(d)) { reduce(); }

  void reduce() {
    if (den == 0) throw std::domain_error("Scalar: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (num == 0) {
      den = 1;
      return;
    }
    BigInt g = big_gcd(big_abs(num), den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  bool is_zero() const { return num == 0; }
  bool is_integer() const { return den == 1; }

  bool operator==(const Scalar&) const = default;

  Scalar operator-() const {
    Scalar r(*this);
    r.num = -r.num;
    return r;
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.den == 1 && b.den == 1) return Scalar(a.num + b.num);
    return Scalar(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.num == 0 || b.num == 0) return Scalar();
    if (a.den == 1 && b.den == 1) return Scalar(a.num * b.num);
    return Scalar(a.num * b.num, a.den * b.den);
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (b.num == 0) throw std::domain_error("Scalar: division by zero");
    return Scalar(a.num * b.den, a.den * b.num);
  }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  std::string str() const { return den == 1 ? num.str() : num.str() + "/" + den.str(); }
};

inline bool scalar_in_ring(const Scalar& s, const RingSpec& ring) {
  if (!ring.is_local()) return s.den == 1;
  return s.den % ring.prime != 0;  // reduced, so den > 0 and coprime check suffices
}

// units: +-1 in Z; valuation-0 elements in Z_(p)
inline bool is_unit(const Scalar& s, const RingSpec& ring) {
  if (s.num == 0 || !scalar_in_ring(s, ring)) return false;
  if (!ring.is_local()) return big_abs(s.num) == 1;
  return s.num % ring.prime != 0;
}

// v_p of a nonzero scalar (may be negative on non-elements)
inline long valuation(const Scalar& s, const BigInt& p) {
  long v = p_valuation(s.num, p);
  if (s.den % p == 0) v -= p_valuation(s.den, p);
  return v;
}

// canonical associate of a nonzero ring element and the unit carrying s onto it:
// Z: |s| ; Z_(p): p^v. Returns (canonical, u) with u * s = canonical.
inline std::pair<Scalar, Scalar> canonical_associate(const Scalar& s, const RingSpec& ring) {
  if (s.is_zero()) throw std::invalid_argument("canonical_associate: zero input");
  if (!ring.is_local()) {
    Scalar c = s.num < 0 ? -s : s;
    return {c, Scalar(s.num < 0 ? -1 : 1)};
  }
  Scalar c(big_pow(ring.prime, static_cast<unsigned long>(valuation(s, ring.prime))));
  return {c, c / s};
}

// exact integer division of ring elements: q with q*b = a, when it exists
inline bool divides(const Scalar& b, const Scalar& a, const RingSpec& ring) {
  if (b.is_zero()) return a.is_zero();
  Scalar q = a / b;
  return scalar_in_ring(q, ring);
}

}  // namespace kwitness
