#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "charsub/errors.hpp"
#include "charsub/numeric.hpp"
#include "charsub/value.hpp"

namespace charsub {

// ---------------------------------------------------------------------------
// Expression AST shared by the three DSL dialects:
//   * integer expressions over k (set generators, ratio streams): + - * ^ root
//   * modulus expressions over x: + - * / ^(rational) log sqrt
//   * weight expressions over n: same as modulus, plus root (floor roots)
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Log, Sqrt, Root };
  Kind kind;
  Rat cval;       // Const
  ExprPtr a, b;   // operands (b: Pow exponent, Root unused)
  unsigned deg = 0;  // Root degree

  static ExprPtr constant(Rat v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Const;
    e->cval = std::move(v);
    return e;
  }
  static ExprPtr var() {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    return e;
  }
  static ExprPtr node(Kind k, ExprPtr x, ExprPtr y = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(x);
    e->b = std::move(y);
    return e;
  }
  static ExprPtr root(ExprPtr x, unsigned degree) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Root;
    e->a = std::move(x);
    e->deg = degree;
    return e;
  }
};

inline std::string expr_str(const ExprPtr& e, const std::string& varname) {
  using K = Expr::Kind;
  auto paren = [&](const ExprPtr& c) {
    std::string s = expr_str(c, varname);
    if (c->kind == K::Const || c->kind == K::Var || c->kind == K::Log || c->kind == K::Sqrt ||
        c->kind == K::Root)
      return s;
    return "(" + s + ")";
  };
  switch (e->kind) {
    case K::Const: return rat_str(e->cval);
    case K::Var: return varname;
    case K::Add: return expr_str(e->a, varname) + "+" + paren(e->b);
    case K::Sub: return expr_str(e->a, varname) + "-" + paren(e->b);
    case K::Mul: return paren(e->a) + "*" + paren(e->b);
    case K::Div: return paren(e->a) + "/" + paren(e->b);
    case K::Pow: return paren(e->a) + "^" + paren(e->b);
    case K::Log: return "log(" + expr_str(e->a, varname) + ")";
    case K::Sqrt: return "sqrt(" + expr_str(e->a, varname) + ")";
    case K::Root: return "root(" + expr_str(e->a, varname) + "," + std::to_string(e->deg) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Integer dialect. Values past the magnitude cap are tracked as signed
// infinities so that monotone generator searches can treat them as "beyond
// any index of interest" without materializing astronomic numbers.
// ---------------------------------------------------------------------------

struct IntVal {
  enum class S { ok, pos_inf, neg_inf };
  S s = S::ok;
  Int v;

  static IntVal of(Int x) { return {S::ok, std::move(x)}; }
  static IntVal pinf() { return {S::pos_inf, 0}; }
  static IntVal ninf() { return {S::neg_inf, 0}; }
  bool finite() const { return s == S::ok; }
};

inline IntVal eval_int(const ExprPtr& e, const Int& var, const Config& cfg) {
  using K = Expr::Kind;
  const unsigned cap = cfg.magnitude_cap_bits;
  auto capped = [&](Int x) -> IntVal {
    if (bit_length(x) > cap) return x > 0 ? IntVal::pinf() : IntVal::ninf();
    return IntVal::of(std::move(x));
  };
  switch (e->kind) {
    case K::Const: {
      if (den(e->cval) != 1) throw DomainError("integer expression with non-integer constant");
      return capped(num(e->cval));
    }
    case K::Var: return capped(var);
    case K::Add: {
      IntVal x = eval_int(e->a, var, cfg), y = eval_int(e->b, var, cfg);
      if (x.finite() && y.finite()) return capped(x.v + y.v);
      if (x.s == IntVal::S::pos_inf && y.s == IntVal::S::neg_inf) throw CapError("inf - inf in integer expression");
      if (x.s == IntVal::S::neg_inf && y.s == IntVal::S::pos_inf) throw CapError("inf - inf in integer expression");
      return x.finite() ? y : x;
    }
    case K::Sub: {
      IntVal x = eval_int(e->a, var, cfg), y = eval_int(e->b, var, cfg);
      if (x.finite() && y.finite()) return capped(x.v - y.v);
      if (x.s == y.s && !x.finite()) throw CapError("inf - inf in integer expression");
      if (!x.finite()) return x;
      return y.s == IntVal::S::pos_inf ? IntVal::ninf() : IntVal::pinf();
    }
    case K::Mul: {
      IntVal x = eval_int(e->a, var, cfg), y = eval_int(e->b, var, cfg);
      if (x.finite() && y.finite()) return capped(x.v * y.v);
      int sx = x.finite() ? (x.v > 0 ? 1 : x.v < 0 ? -1 : 0) : (x.s == IntVal::S::pos_inf ? 1 : -1);
      int sy = y.finite() ? (y.v > 0 ? 1 : y.v < 0 ? -1 : 0) : (y.s == IntVal::S::pos_inf ? 1 : -1);
      if (sx == 0 || sy == 0) throw CapError("0 * inf in integer expression");
      return sx * sy > 0 ? IntVal::pinf() : IntVal::ninf();
    }
    case K::Div: throw DomainError("division is not part of the integer dialect");
    case K::Pow: {
      IntVal base = eval_int(e->a, var, cfg), ex = eval_int(e->b, var, cfg);
      if (!ex.finite()) {
        if (ex.s == IntVal::S::neg_inf) throw DomainError("negative exponent");
        if (!base.finite() || base.v >= 2) return IntVal::pinf();
        if (base.v == 1) return IntVal::of(1);
        if (base.v == 0) return IntVal::of(0);
        throw CapError("negative base with unbounded exponent");
      }
      if (ex.v < 0) throw DomainError("negative exponent");
      if (!base.finite()) {
        if (ex.v == 0) return IntVal::of(1);
        if (base.s == IntVal::S::pos_inf) return IntVal::pinf();
        return (ex.v % 2 == 0) ? IntVal::pinf() : IntVal::ninf();
      }
      auto r = checked_pow(base.v, ex.v, cap);
      if (!r) return base.v >= 0 || ex.v % 2 == 0 ? IntVal::pinf() : IntVal::ninf();
      return IntVal::of(*r);
    }
    case K::Root: {
      // evaluate the radicand under an inflated cap so the root can land back
      // under the real cap
      unsigned deg = e->deg == 0 ? 1 : e->deg;
      Config inner = cfg;
      if (cap < (1u << 22) / deg) inner.magnitude_cap_bits = cap * deg + 2;
      IntVal x = eval_int(e->a, var, inner);
      if (!x.finite()) {
        if (x.s == IntVal::S::neg_inf) throw DomainError("floor root of negative value");
        return IntVal::pinf();
      }
      if (x.v < 0) throw DomainError("floor root of negative value");
      Int r = iroot_floor(x.v, deg);
      if (bit_length(r) > cap) return IntVal::pinf();
      return IntVal::of(r);
    }
    case K::Log:
    case K::Sqrt: throw DomainError("log/sqrt are not part of the integer dialect");
  }
  throw Error("unreachable");
}

// ---------------------------------------------------------------------------
// Certified real evaluation.
// ---------------------------------------------------------------------------

namespace detail {

/// Lower/upper fixed-point sums (scale 2^W) of atanh(z) for rational z in [0, 3/4].
inline std::pair<Int, Int> atanh_fixed(const Rat& z, unsigned W) {
  if (z < 0 || z > Rat(3, 4)) throw DomainError("atanh_fixed: z outside [0, 3/4]");
  Int scale = pow2(W);
  Int zl = floor_rat(z * scale), zh = ceil_rat(z * scale);
  Int z2l = (zl * zl) >> W;
  Int z2h = ceil_div(zh * zh, scale);
  if (zh == 0) return {Int(0), Int(0)};
  Int pl = zl, ph = zh, slo = 0, shi = 0;
  for (unsigned j = 0;; ++j) {
    unsigned d = 2 * j + 1;
    slo += pl / d;
    shi += ceil_div(ph, Int(d));
    pl = (pl * z2l) >> W;
    ph = ceil_div(ph * z2h, scale);
    if (ph <= 4) {
      // geometric tail: sum of remaining true terms <= ph / (1 - z^2) < 3 ph ulps
      shi += 3 * ph;
      break;
    }
    if (j > 8 * W + 64) throw Error("atanh_fixed: series failed to terminate");
  }
  return {slo, shi};
}

inline std::pair<Int, Int> ln2_fixed(unsigned W) {
  static std::map<unsigned, std::pair<Int, Int>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(W);
  if (it != cache.end()) return it->second;
  auto s = atanh_fixed(Rat(1, 3), W);
  std::pair<Int, Int> v{2 * s.first, 2 * s.second};
  cache.emplace(W, v);
  return v;
}

}  // namespace detail

/// Certified natural logarithm of a positive rational; width <= 2^-prec.
/// For huge arguments the work scales with prec and bit length, not magnitude.
inline Ival ln_ival(const Rat& y, unsigned prec) {
  if (y <= 0) throw DomainError("log of nonpositive value");
  if (y == 1) return Ival(Rat(0));
  if (y < 1) {
    Ival r = ln_ival(Rat(1) / y, prec);
    return {-r.hi, -r.lo};
  }
  long m = floor_log2(y);  // m >= 0
  unsigned W = prec + 16 + bit_length(Int(m));
  Rat t = y / Rat(pow2(static_cast<unsigned>(m)));  // t in [1, 2)
  Rat z = (t - 1) / (t + 1);                        // z in [0, 1/3)
  auto s = detail::atanh_fixed(z, W);
  auto l2 = detail::ln2_fixed(W);
  Int lo = Int(m) * l2.first + 2 * s.first;
  Int hi = Int(m) * l2.second + 2 * s.second;
  Int scale = pow2(W);
  return {Rat(lo, scale), Rat(hi, scale)};
}

/// Certified r^(p/q) for rational r >= 0, integer p >= 0, q >= 1.
/// Exact whenever r^p is a perfect q-th power; otherwise width <= 2^{1-prec}.
inline Ival pow_rat_ival(const Rat& r, const Int& p, unsigned q, unsigned prec) {
  if (r < 0) throw DomainError("rational power of negative base");
  if (p == 0) return Ival(Rat(1));
  if (r == 0) return Ival(Rat(0));
  if (p < 0) throw DomainError("negative exponent");
  if (p > 1000000 || q > 1000000) throw CapError("rational exponent too large");
  unsigned pu = p.convert_to<unsigned>();
  Int pn = boost::multiprecision::pow(num(r), pu);
  Int pd = boost::multiprecision::pow(den(r), pu);
  if (q == 1) return Ival(Rat(pn, pd));
  Int rn = iroot_floor(pn, q), rd = iroot_floor(pd, q);
  if (boost::multiprecision::pow(rn, q) == pn && boost::multiprecision::pow(rd, q) == pd)
    return Ival(Rat(rn, rd));  // exact perfect power
  if (static_cast<unsigned long long>(q) * prec > (1ull << 26))
    throw CapError("rational power: scale exceeds working cap");
  Int shifted = (pn << (q * prec)) / pd;
  Int lo = iroot_floor(shifted, q);
  Int hi = iroot_ceil(shifted + 1, q);
  return {Rat(lo, pow2(prec)), Rat(hi, pow2(prec))};
}

/// Certified evaluation of a real-dialect expression at an interval argument.
/// nullopt means "indeterminate at this precision" (e.g. divisor straddles 0);
/// callers refine by re-evaluating at doubled precision.
inline std::optional<Ival> eval_real(const ExprPtr& e, const Ival& x, unsigned prec,
                                     const Config& cfg) {
  using K = Expr::Kind;
  switch (e->kind) {
    case K::Const: return Ival(e->cval);
    case K::Var: return x;
    case K::Add: {
      auto u = eval_real(e->a, x, prec + 2, cfg), v = eval_real(e->b, x, prec + 2, cfg);
      if (!u || !v) return std::nullopt;
      return *u + *v;
    }
    case K::Sub: {
      auto u = eval_real(e->a, x, prec + 2, cfg), v = eval_real(e->b, x, prec + 2, cfg);
      if (!u || !v) return std::nullopt;
      return *u - *v;
    }
    case K::Mul: {
      auto u = eval_real(e->a, x, prec + 2, cfg), v = eval_real(e->b, x, prec + 2, cfg);
      if (!u || !v) return std::nullopt;
      return *u * *v;
    }
    case K::Div: {
      auto u = eval_real(e->a, x, prec + 2, cfg), v = eval_real(e->b, x, prec + 2, cfg);
      if (!u || !v) return std::nullopt;
      return try_div(*u, *v);
    }
    case K::Pow: {
      if (e->b->kind != K::Const) throw DomainError("real-dialect exponent must be a rational constant");
      Rat ex = e->b->cval;
      auto u = eval_real(e->a, x, prec + 2, cfg);
      if (!u) return std::nullopt;
      if (u->lo < 0) {
        if (u->hi < 0) throw DomainError("rational power of negative base");
        return std::nullopt;  // straddles 0: refine
      }
      unsigned q = static_cast<unsigned>(den(ex));
      // monotone increasing in the base for positive exponents
      Ival lo = pow_rat_ival(u->lo, num(ex), q, prec);
      Ival hi = pow_rat_ival(u->hi, num(ex), q, prec);
      return Ival{lo.lo, hi.hi};
    }
    case K::Sqrt: {
      auto u = eval_real(e->a, x, prec + 2, cfg);
      if (!u) return std::nullopt;
      if (u->lo < 0) {
        if (u->hi < 0) throw DomainError("sqrt of negative value");
        return std::nullopt;
      }
      return sqrt_ival(*u, prec);
    }
    case K::Log: {
      auto u = eval_real(e->a, x, prec + 2, cfg);
      if (!u) return std::nullopt;
      if (u->lo <= 0) {
        if (u->hi <= 0) throw DomainError("log of nonpositive value");
        return std::nullopt;  // refine until bounded away from 0
      }
      Ival l = ln_ival(u->lo, prec);
      Ival h = ln_ival(u->hi, prec);
      return Ival{l.lo, h.hi};
    }
    case K::Root: {
      auto u = eval_real(e->a, x, prec + 2, cfg);
      if (!u) return std::nullopt;
      if (!u->exact() || den(u->lo) != 1)
        throw DomainError("floor root requires an exact integer argument");
      if (u->lo < 0) throw DomainError("floor root of negative value");
      return Ival(Rat(iroot_floor(num(u->lo), e->deg)));
    }
  }
  throw Error("unreachable");
}

inline std::optional<Ival> eval_real(const ExprPtr& e, const Rat& x, unsigned prec,
                                     const Config& cfg) {
  return eval_real(e, Ival(x), prec, cfg);
}

}  // namespace charsub
