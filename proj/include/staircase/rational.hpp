#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace staircase {

// Exact arithmetic everywhere: chip amounts, part measures and kernel entries
// are arbitrary-precision rationals so that conservation laws and cycle
// detection are exact, never approximate.
using Rational = mpq_class;
using BigInt = mpz_class;

// gmpxx has no long long overloads; long is 64-bit on every target we build.
static_assert(sizeof(long) == 8, "64-bit long required");
inline BigInt to_big(long long v) { return BigInt(static_cast<long>(v)); }
inline Rational to_rational(long long v) { return Rational(static_cast<long>(v)); }
inline Rational make_rational(long long num, long long den) {
  Rational r(to_big(num), to_big(den));
  r.canonicalize();
  return r;
}

/// mpq arithmetic and comparisons assume canonical form; call this on any
/// rational that crosses an API boundary.
inline Rational canonical(Rational q) {
  q.canonicalize();
  return q;
}

inline BigInt rational_floor(const Rational& q) {
  BigInt r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline BigInt rational_ceil(const Rational& q) {
  BigInt r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Rational rational_frac(const Rational& q) { return q - Rational(rational_floor(q)); }

inline double to_double(const Rational& q) { return q.get_d(); }

/// Parses "num", "num/den" or a plain decimal like "0.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("bad rational '" + std::string(text) + "'");
  };
  if (text.empty()) fail();
  std::string s(text);
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  std::string num, den;
  bool in_den = false, saw_dot = false;
  std::size_t frac_digits = 0;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      (in_den ? den : num) += c;
      if (saw_dot) ++frac_digits;
    } else if (c == '/' && !in_den && !saw_dot) {
      in_den = true;
    } else if (c == '.' && !in_den && !saw_dot) {
      saw_dot = true;
    } else {
      fail();
    }
  }
  if (num.empty()) fail();
  Rational q;
  if (in_den) {
    if (den.empty()) fail();
    BigInt d(den, 10);
    if (d == 0) fail();
    q = Rational(BigInt(num, 10), d);
  } else if (saw_dot) {
    BigInt scale = 1;
    for (std::size_t k = 0; k < frac_digits; ++k) scale *= 10;
    q = Rational(BigInt(num, 10), scale);
  } else {
    q = Rational(BigInt(num, 10));
  }
  q.canonicalize();
  if (neg) q = -q;
  return q;
}

/// "num/den" in lowest terms, or "num" when the denominator is 1.
inline std::string format_rational(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

/// Lowest-denominator rational in [lo, hi] (Stern-Brocot descent).
inline Rational simplest_rational_in(const Rational& lo, const Rational& hi) {
  if (lo > hi) throw std::invalid_argument("simplest_rational_in: empty interval");
  if (lo <= 0 && 0 <= hi) return Rational(0);
  if (hi < 0) return -simplest_rational_in(-hi, -lo);
  // now 0 < lo <= hi
  BigInt fl = rational_floor(lo);
  if (Rational(fl) + 1 <= hi) {
    // an integer lies in the interval
    return Rational(rational_ceil(lo));
  }
  if (lo == Rational(fl)) return lo;
  Rational sub = simplest_rational_in(1 / (hi - Rational(fl)), 1 / (lo - Rational(fl)));
  return Rational(fl) + 1 / sub;
}

inline std::uint64_t hash_mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline std::size_t hash_combine(std::size_t seed, std::uint64_t v) {
  return seed ^ (hash_mix64(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::size_t hash_bigint(std::size_t seed, const BigInt& z) {
  const mpz_srcptr p = z.get_mpz_t();
  seed = hash_combine(seed, static_cast<std::uint64_t>(mpz_sgn(p)));
  const std::size_t limbs = mpz_size(p);
  for (std::size_t i = 0; i < limbs; ++i)
    seed = hash_combine(seed, static_cast<std::uint64_t>(mpz_getlimbn(p, i)));
  return seed;
}

}  // namespace staircase
