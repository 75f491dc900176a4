#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>

#include "charsub/errors.hpp"
#include "charsub/numeric.hpp"

namespace charsub {

/// A certified value: exact when lo == hi, otherwise a closed interval
/// guaranteed to contain the true (real) value.
struct Ival {
  Rat lo, hi;

  Ival() : lo(0), hi(0) {}
  explicit Ival(const Rat& v) : lo(v), hi(v) {}
  Ival(const Rat& l, const Rat& h) : lo(l), hi(h) {
    if (lo > hi) throw Error("Ival: inverted endpoints");
  }

  bool exact() const { return lo == hi; }
  Rat width() const { return hi - lo; }
  Rat radius() const { return (hi - lo) / 2; }
  Rat mid() const { return (hi + lo) / 2; }
};

inline Ival operator+(const Ival& a, const Ival& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Ival operator-(const Ival& a, const Ival& b) { return {a.lo - b.hi, a.hi - b.lo}; }

inline Ival operator*(const Ival& a, const Ival& b) {
  Rat c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
  return {std::min(std::min(c1, c2), std::min(c3, c4)), std::max(std::max(c1, c2), std::max(c3, c4))};
}

/// Interval division; nullopt when the divisor straddles 0 (caller refines).
inline std::optional<Ival> try_div(const Ival& a, const Ival& b) {
  if (b.lo <= 0 && b.hi >= 0) return std::nullopt;
  Rat c1 = a.lo / b.lo, c2 = a.lo / b.hi, c3 = a.hi / b.lo, c4 = a.hi / b.hi;
  return Ival{std::min(std::min(c1, c2), std::min(c3, c4)), std::max(std::max(c1, c2), std::max(c3, c4))};
}

/// Certified square root with width <= 2^-prec; exact for perfect squares.
inline Ival sqrt_ival(const Ival& v, unsigned prec) {
  if (v.lo < 0) throw DomainError("sqrt of interval reaching below 0");
  auto bound = [&](const Rat& r, bool upper) -> Rat {
    if (r == 0) return Rat(0);
    Int x = num(r) * den(r);  // sqrt(p/q) = sqrt(p*q)/q
    Int scaled = x << (2 * prec);
    Int s = isqrt_floor(scaled);
    if (s * s == scaled) return Rat(s, den(r) << prec);
    return upper ? Rat(s + 1, den(r) << prec) : Rat(s, den(r) << prec);
  };
  return {bound(v.lo, false), bound(v.hi, true)};
}

enum class Ord { lt, eq, gt };

/// Decides the order of two certified values when the intervals permit it.
inline std::optional<Ord> try_order(const Ival& a, const Ival& b) {
  if (a.exact() && b.exact()) {
    if (a.lo < b.lo) return Ord::lt;
    if (a.lo > b.lo) return Ord::gt;
    return Ord::eq;
  }
  if (a.hi < b.lo) return Ord::lt;
  if (b.hi < a.lo) return Ord::gt;
  return std::nullopt;
}

/// Evaluator convention: prec -> certified value, or nullopt when the value
/// cannot be formed yet (e.g. a divisor interval still straddles 0).
using EvalFn = std::function<std::optional<Ival>(unsigned)>;

/// Certified comparison with automatic precision doubling up to the cap.
/// Never guesses: an undecidable comparison raises PrecisionError.
inline Ord certified_order(const EvalFn& a, const EvalFn& b, const Config& cfg,
                           const std::string& what = "comparison") {
  for (unsigned prec = cfg.prec_start;; prec *= 2) {
    auto va = a(prec);
    auto vb = b(prec);
    if (va && vb) {
      auto o = try_order(*va, *vb);
      if (o) return *o;
    }
    if (prec >= cfg.prec_cap)
      throw PrecisionError("undecidable at precision cap: " + what);
  }
}

inline Ord certified_order(const EvalFn& a, const Rat& b, const Config& cfg,
                           const std::string& what = "comparison") {
  return certified_order(a, [&b](unsigned) { return Ival(b); }, cfg, what);
}

inline bool certified_less(const EvalFn& a, const EvalFn& b, const Config& cfg,
                           const std::string& what = "comparison") {
  return certified_order(a, b, cfg, what) == Ord::lt;
}

/// Evaluates with doubling precision until defined and width <= 2^-want_bits.
inline Ival eval_refined(const EvalFn& f, unsigned want_bits, const Config& cfg,
                         const std::string& what = "evaluation") {
  Rat target = Rat(1, pow2(want_bits));
  for (unsigned prec = std::max(cfg.prec_start, want_bits);; prec *= 2) {
    auto v = f(prec);
    if (v && v->width() <= target) return *v;
    if (prec >= cfg.prec_cap) {
      if (v) return *v;  // defined but wide: let the caller see the radius
      throw PrecisionError("no certified value at precision cap: " + what);
    }
  }
}

}  // namespace charsub
