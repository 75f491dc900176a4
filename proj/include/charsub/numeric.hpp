#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace charsub {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int den(const Rat& r) { return boost::multiprecision::denominator(r); }

/// Number of bits in |x|; bit_length(0) == 0.
inline unsigned bit_length(const Int& x) {
  if (x == 0) return 0;
  return static_cast<unsigned>(boost::multiprecision::msb(boost::multiprecision::abs(x))) + 1u;
}

inline Int pow2(unsigned k) { return Int(1) << k; }

/// base^exp, or nullopt once the result would exceed cap_bits bits.
inline std::optional<Int> checked_pow(const Int& base, const Int& exp, unsigned cap_bits) {
  if (exp < 0) throw std::invalid_argument("checked_pow: negative exponent");
  if (base == 0) return Int(exp == 0 ? 1 : 0);
  Int b = base;
  Int e = exp;
  Int acc = 1;
  while (e > 0) {
    if ((e & 1) != 0) {
      acc *= b;
      if (bit_length(acc) > cap_bits) return std::nullopt;
    }
    e >>= 1;
    if (e > 0) {
      b *= b;
      if (bit_length(b) > cap_bits) {
        // b alone past cap is fine only if no further multiply uses it
        if (e > 1 || (e & 1) != 0) return std::nullopt;
      }
    }
  }
  return acc;
}

inline Int floor_div(const Int& a, const Int& b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int ceil_div(const Int& a, const Int& b) { return -floor_div(-a, b); }

inline Int floor_rat(const Rat& r) { return floor_div(num(r), den(r)); }
inline Int ceil_rat(const Rat& r) { return ceil_div(num(r), den(r)); }

/// Largest x >= 0 with x^q <= a (a >= 0, q >= 1). Newton iteration on integers.
inline Int iroot_floor(const Int& a, unsigned q) {
  if (a < 0) throw std::invalid_argument("iroot_floor: negative radicand");
  if (q == 0) throw std::invalid_argument("iroot_floor: zeroth root");
  if (a == 0 || a == 1 || q == 1) return a;
  unsigned bits = bit_length(a);
  Int x = Int(1) << (bits / q + 1);
  while (true) {
    // x_{t+1} = ((q-1) x + a / x^{q-1}) / q
    Int xp = boost::multiprecision::pow(x, q - 1);
    Int next = (Int(q - 1) * x + a / xp) / q;
    if (next >= x) break;
    x = next;
  }
  while (boost::multiprecision::pow(x, q) > a) --x;
  while (boost::multiprecision::pow(x + 1, q) <= a) ++x;
  return x;
}

/// Smallest x >= 0 with x^q >= a.
inline Int iroot_ceil(const Int& a, unsigned q) {
  if (a <= 0) return 0;
  Int r = iroot_floor(a, q);
  if (boost::multiprecision::pow(r, q) == a) return r;
  return r + 1;
}

inline Int isqrt_floor(const Int& a) { return iroot_floor(a, 2); }

/// m with 2^m <= r < 2^{m+1}, for rational r > 0. May be negative.
inline long floor_log2(const Rat& r) {
  if (r <= 0) throw std::invalid_argument("floor_log2: nonpositive argument");
  const Int& p = num(r);
  const Int& q = den(r);
  long m = static_cast<long>(bit_length(p)) - static_cast<long>(bit_length(q));
  // 2^m <= p/q < 2^{m+2}; fix up the one-off cases
  if (m >= 0) {
    if (p >= (q << static_cast<unsigned>(m + 1))) ++m;
    else if (p < (q << static_cast<unsigned>(m))) --m;
  } else {
    if ((p << static_cast<unsigned>(-m)) < q) --m;
    else if ((p << static_cast<unsigned>(-(m + 1))) >= q) ++m;
  }
  return m;
}

/// Parses a nonnegative integer literal; accepts scientific shorthand like 1e6 (exact).
inline Int parse_int(const std::string& s) {
  auto epos = s.find_first_of("eE");
  if (epos == std::string::npos) return Int(s);
  Int mant(s.substr(0, epos));
  Int ex(s.substr(epos + 1));
  if (ex < 0) throw std::invalid_argument("parse_int: negative exponent in " + s);
  Int p = 1;
  for (Int i = 0; i < ex; ++i) p *= 10;
  return mant * p;
}

/// Parses "p", "p/q" or e-notation into an exact rational.
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(parse_int(s));
  Int p = parse_int(s.substr(0, slash));
  Int q = parse_int(s.substr(slash + 1));
  if (q == 0) throw std::invalid_argument("parse_rat: zero denominator in " + s);
  return Rat(p, q);
}

inline std::string rat_str(const Rat& r) {
  if (den(r) == 1) return num(r).str();
  return num(r).str() + "/" + den(r).str();
}

}  // namespace charsub
