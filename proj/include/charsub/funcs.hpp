#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charsub/expr.hpp"

namespace charsub {

// ---------------------------------------------------------------------------
// Structural shape of a function expression. Comparisons of the form
// s(x) vs c*s(y) reduce to exact big-rational comparisons for these shapes,
// which is what makes minimality scans exact at block boundaries.
// ---------------------------------------------------------------------------

struct FnShape {
  enum class Kind { identity, powrat, log1p, other } kind = Kind::other;
  Int p = 1, q = 1;  // powrat exponent p/q

  static FnShape identity() { return {Kind::identity, 1, 1}; }
  static FnShape powrat(Int pp, Int qq) { return {Kind::powrat, std::move(pp), std::move(qq)}; }
  static FnShape log1p() { return {Kind::log1p, 1, 1}; }
  static FnShape other() { return {Kind::other, 1, 1}; }
};

namespace detail {
inline bool shape_is_one_plus_var(const ExprPtr& e) {
  return e->kind == Expr::Kind::Add &&
         ((e->a->kind == Expr::Kind::Const && e->a->cval == 1 && e->b->kind == Expr::Kind::Var) ||
          (e->b->kind == Expr::Kind::Const && e->b->cval == 1 && e->a->kind == Expr::Kind::Var));
}
}  // namespace detail

inline FnShape expr_shape(const ExprPtr& e) {
  using K = Expr::Kind;
  if (!e) return FnShape::other();
  if (e->kind == K::Var) return FnShape::identity();
  if (e->kind == K::Sqrt && e->a->kind == K::Var) return FnShape::powrat(1, 2);
  if (e->kind == K::Pow && e->a->kind == K::Var && e->b->kind == K::Const && e->b->cval > 0)
    return FnShape::powrat(num(e->b->cval), den(e->b->cval));
  if (e->kind == K::Log && detail::shape_is_one_plus_var(e->a)) return FnShape::log1p();
  return FnShape::other();
}

inline Ord exact_order(const Rat& a, const Rat& b) {
  if (a < b) return Ord::lt;
  if (a > b) return Ord::gt;
  return Ord::eq;
}

/// Decides s(x) vs c*s(y) exactly for x, y >= 0 rational and c > 0 rational.
/// powrat raises both sides to the q-th power; log1p turns the scaled
/// comparison into (1+x)^{qc} vs (1+y)^{pc}. Returns nullopt for Kind::other.
inline std::optional<Ord> shape_scaled_order(const FnShape& s, const Rat& x, const Rat& c,
                                             const Rat& y) {
  using K = FnShape::Kind;
  switch (s.kind) {
    case K::identity: return exact_order(x, Rat(c * y));
    case K::powrat: {
      if (s.p <= 0 || s.q <= 0 || s.p > 4096 || s.q > 4096) return std::nullopt;
      unsigned pu = s.p.convert_to<unsigned>(), qu = s.q.convert_to<unsigned>();
      auto powr = [](const Rat& r, unsigned e) {
        return Rat(boost::multiprecision::pow(num(r), e), boost::multiprecision::pow(den(r), e));
      };
      return exact_order(powr(x, pu), Rat(powr(c, qu) * powr(y, pu)));
    }
    case K::log1p: {
      // ln(1+x) vs (pc/qc) ln(1+y)  <=>  (1+x)^qc vs (1+y)^pc
      Int pc = num(c), qc = den(c);
      if (pc <= 0) return std::nullopt;
      if (x < 0 || y < 0) return std::nullopt;
      Rat bx = 1 + x, by = 1 + y;
      // guard the blowup of exact powers
      double szx = static_cast<double>(bit_length(num(bx)) + bit_length(den(bx)));
      double szy = static_cast<double>(bit_length(num(by)) + bit_length(den(by)));
      if (szx * qc.convert_to<double>() > 2e6 || szy * pc.convert_to<double>() > 2e6)
        return std::nullopt;
      unsigned pu = pc.convert_to<unsigned>(), qu = qc.convert_to<unsigned>();
      auto powr = [](const Rat& r, unsigned e) {
        return Rat(boost::multiprecision::pow(num(r), e), boost::multiprecision::pow(den(r), e));
      };
      return exact_order(powr(bx, qu), powr(by, pu));
    }
    case K::other: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ModulusFn: the f of d^f_g. Evaluable at arbitrary-precision nonnegative
// rationals with certified bounds; axiom validation is sample-based.
// ---------------------------------------------------------------------------

class ModulusFn {
 public:
  ModulusFn() = default;
  ModulusFn(std::string dsl_text, ExprPtr e, bool unbounded)
      : dsl_(std::move(dsl_text)), expr_(std::move(e)), unbounded_(unbounded),
        shape_(expr_shape(expr_)) {}

  const std::string& dsl() const { return dsl_; }
  const ExprPtr& expr() const { return expr_; }
  bool unbounded() const { return unbounded_; }
  const FnShape& shape() const { return shape_; }

  std::optional<Ival> eval(const Rat& x, unsigned prec, const Config& cfg) const {
    if (x < 0) throw DomainError("modulus argument below 0");
    return eval_real(expr_, x, prec, cfg);
  }

  /// Monotone bracketing over an interval argument (moduli are non-decreasing).
  std::optional<Ival> eval(const Ival& x, unsigned prec, const Config& cfg) const {
    if (x.exact()) return eval(x.lo, prec, cfg);
    auto lo = eval(x.lo < 0 ? Rat(0) : x.lo, prec, cfg);
    auto hi = eval(x.hi, prec, cfg);
    if (!lo || !hi) return std::nullopt;
    return Ival{lo->lo, hi->hi};
  }

  EvalFn at(const Rat& x, const Config& cfg) const {
    ExprPtr e = expr_;
    return [e, x, cfg](unsigned prec) { return eval_real(e, x, prec, cfg); };
  }

  /// Minimal known x with f(x) >= T (search procedure; see invert_modulus).
  Int unbounded_witness(const Rat& T, const Config& cfg) const;

 private:
  std::string dsl_;
  ExprPtr expr_;
  bool unbounded_ = false;
  FnShape shape_;
};

/// Minimal nonnegative integer x with f(x) >= y. Exponential search then
/// bisection; valid because moduli are non-decreasing.
inline Int invert_modulus(const ModulusFn& f, const Rat& y, const Config& cfg = default_config()) {
  if (y < 0) throw DomainError("invert_modulus: negative target");
  if (y == 0) return 0;
  auto ge = [&](const Int& x) {
    Ord o = certified_order(f.at(Rat(x), cfg), y, cfg, "f(" + x.str() + ") vs target");
    return o != Ord::lt;
  };
  Int hi = 1;
  while (!ge(hi)) {
    hi <<= 1;
    if (bit_length(hi) > cfg.magnitude_cap_bits)
      throw CapabilityError("invert_modulus: no x with f(x) >= " + rat_str(y) +
                            " under the magnitude cap (f may be bounded)");
  }
  Int lo = hi >> 1;  // f(lo) < y (or lo == 0)
  while (lo + 1 < hi) {
    Int mid = (lo + hi) >> 1;
    if (ge(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

inline Int ModulusFn::unbounded_witness(const Rat& T, const Config& cfg) const {
  return invert_modulus(*this, T, cfg);
}

// ---------------------------------------------------------------------------
// Axiom validation at sample scale.
// ---------------------------------------------------------------------------

struct AxiomCheck {
  std::string axiom;
  bool pass;
  std::string detail;  // counterexample or evidence note
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline AxiomReport check_modulus_axioms(const ModulusFn& f, const std::vector<Rat>& samples,
                                        const Config& cfg = default_config()) {
  if (samples.empty()) throw DomainError("check_modulus_axioms: empty sample set");
  for (const auto& s : samples)
    if (s < 0) throw DomainError("check_modulus_axioms: negative sample " + rat_str(s));
  AxiomReport rep;
  auto order_vs = [&](const Rat& x, const Rat& y, const std::string& what) {
    return certified_order(f.at(x, cfg), f.at(y, cfg), cfg, what);
  };

  // f(0) = 0
  {
    Ord o = certified_order(f.at(Rat(0), cfg), Rat(0), cfg, "f(0)");
    rep.checks.push_back({"vanishes-at-0", o == Ord::eq,
                          o == Ord::eq ? "f(0) = 0" : "f(0) != 0"});
  }
  // f(x) > 0 for sampled x > 0
  {
    bool ok = true;
    std::string detail = "positive on all sampled x > 0";
    for (const auto& x : samples) {
      if (x == 0) continue;
      if (certified_order(f.at(x, cfg), Rat(0), cfg, "positivity") != Ord::gt) {
        ok = false;
        detail = "f(" + rat_str(x) + ") <= 0";
        break;
      }
    }
    rep.checks.push_back({"positive-off-0", ok, detail});
  }
  // non-decreasing on every sampled pair
  {
    std::vector<Rat> s = samples;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    bool ok = true;
    std::string detail = "non-decreasing on all sampled pairs";
    for (std::size_t i = 0; ok && i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j)
        if (order_vs(s[i], s[j], "monotonicity") == Ord::gt) {
          ok = false;
          detail = "f(" + rat_str(s[i]) + ") > f(" + rat_str(s[j]) + ")";
          break;
        }
    rep.checks.push_back({"non-decreasing", ok, detail});
  }
  // subadditive on every sampled pair
  {
    bool ok = true;
    std::string detail = "subadditive on all sampled pairs";
    for (std::size_t i = 0; ok && i < samples.size(); ++i)
      for (std::size_t j = i; j < samples.size(); ++j) {
        const Rat &x = samples[i], &y = samples[j];
        if (x == 0 || y == 0) continue;  // reduces to f(0) = 0, checked above
        EvalFn lhs = f.at(x + y, cfg);
        EvalFn rhs = [&f, x, y, &cfg](unsigned prec) -> std::optional<Ival> {
          auto a = f.eval(x, prec, cfg);
          auto b = f.eval(y, prec, cfg);
          if (!a || !b) return std::nullopt;
          return *a + *b;
        };
        if (certified_order(lhs, rhs, cfg, "subadditivity") == Ord::gt) {
          ok = false;
          detail = "f(" + rat_str(x + y) + ") > f(" + rat_str(x) + ")+f(" + rat_str(y) +
                   ") at (" + rat_str(x) + "," + rat_str(y) + ")";
          break;
        }
      }
    rep.checks.push_back({"subadditive", ok, detail});
  }
  // right continuity at 0: sampled evidence only (no finite certificate exists)
  {
    Ival ref = eval_refined(f.at(Rat(1, 2), cfg), cfg.prec_start, cfg, "f(1/2)");
    Rat target = ref.hi / 8;
    bool ok = false;
    unsigned kfound = 0;
    for (unsigned k = 1; k <= 256; ++k) {
      Ord o = certified_order(f.at(Rat(1, pow2(k)), cfg), target, cfg, "right continuity");
      if (o == Ord::lt) {
        ok = true;
        kfound = k;
        break;
      }
    }
    rep.checks.push_back({"right-continuous-at-0 (sampled evidence)", ok,
                          ok ? "f(1/2^" + std::to_string(kfound) + ") < f(1/2)/8"
                             : "no decay observed for k <= 256"});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// WeightFn: the g of d^f_g, defined on positive integers. Divergence
// witnesses make tail minima and minimality scans finite computations.
// ---------------------------------------------------------------------------

class WeightFn {
 public:
  using Evaluator = std::function<std::optional<Ival>(const Int& n, unsigned prec, const Config&)>;
  using Witness = std::function<Int(const Rat& T, const Config&)>;

  WeightFn() = default;
  WeightFn(std::string dsl_text, Evaluator ev, Witness w, bool nondecreasing)
      : dsl_(std::move(dsl_text)), ev_(std::move(ev)), witness_(std::move(w)),
        nondecreasing_(nondecreasing) {}

  WeightFn& with_shape(FnShape s) {
    shape_ = std::move(s);
    return *this;
  }
  WeightFn& with_exact_values() {
    exact_valued_ = true;
    return *this;
  }

  const std::string& dsl() const { return dsl_; }
  bool nondecreasing() const { return nondecreasing_; }
  bool has_witness() const { return static_cast<bool>(witness_); }
  const FnShape& shape() const { return shape_; }
  /// true when eval always returns an exact rational
  bool exact_valued() const { return exact_valued_; }

  std::optional<Ival> eval(const Int& n, unsigned prec, const Config& cfg) const {
    if (n < 1) throw DomainError("weight argument below 1");
    return ev_(n, prec, cfg);
  }

  EvalFn at(const Int& n, const Config& cfg) const {
    auto ev = ev_;
    Int m = n;
    return [ev, m, cfg](unsigned prec) { return ev(m, prec, cfg); };
  }

  /// Index N with g(n) >= T for all n >= N.
  Int divergence_witness(const Rat& T, const Config& cfg) const {
    if (!witness_)
      throw CapabilityError("weight '" + dsl_ + "' has no divergence witness");
    return witness_(T, cfg);
  }

 private:
  std::string dsl_;
  Evaluator ev_;
  Witness witness_;
  bool nondecreasing_ = false;
  FnShape shape_ = FnShape::other();
  bool exact_valued_ = false;
};

/// Witness for a non-decreasing weight: exponential search for some n with
/// g(n) >= T certified (valid because later values can only be larger).
/// Minimality is not needed, so near-ties are resolved by searching further
/// rather than by raising precision.
inline WeightFn::Witness monotone_search_witness(WeightFn::Evaluator ev) {
  return [ev](const Rat& T, const Config& cfg) -> Int {
    Int n = 1;
    while (true) {
      auto v = ev(n, cfg.prec_start, cfg);
      if (v && v->lo >= T) return n;
      n <<= 1;
      if (bit_length(n) > cfg.magnitude_cap_bits)
        throw CapabilityError("divergence witness search exceeded the magnitude cap");
    }
  };
}

inline WeightFn weight_from_expr(const std::string& dsl_text, ExprPtr e, bool nondecreasing) {
  WeightFn::Evaluator ev = [e](const Int& n, unsigned prec, const Config& cfg) {
    return eval_real(e, Rat(n), prec, cfg);
  };
  WeightFn::Witness w;
  if (nondecreasing) w = monotone_search_witness(ev);
  FnShape s = expr_shape(e);
  bool exact = s.kind == FnShape::Kind::identity;
  WeightFn out(dsl_text, std::move(ev), std::move(w), nondecreasing);
  out.with_shape(std::move(s));
  if (exact) out.with_exact_values();
  return out;
}

// ---------------------------------------------------------------------------
// Lemma-style monotone replacement: g'(n) = min_{m >= n} g(m). The divergence
// witness truncates the tail: beyond witness(g(n)+1) every value exceeds g(n),
// so the minimum is attained on a finite window.
// ---------------------------------------------------------------------------

inline WeightFn monotone_envelope(const WeightFn& g, const Config& cfg = default_config()) {
  if (!g.has_witness())
    throw CapabilityError("monotone_envelope requires a divergence witness");
  auto argmin_cache = std::make_shared<std::map<Int, Int>>();
  auto mu = std::make_shared<std::mutex>();
  WeightFn base = g;

  auto argmin_at = [argmin_cache, mu, base](const Int& n, const Config& c) -> Int {
    {
      std::lock_guard<std::mutex> lock(*mu);
      auto it = argmin_cache->find(n);
      if (it != argmin_cache->end()) return it->second;
    }
    Ival gn = eval_refined(base.at(n, c), c.prec_start, c, "g(n) for envelope");
    Int w = base.divergence_witness(gn.hi + 1, c);
    Int best = n;
    for (Int m = n + 1; m < w; ++m) {
      Ord o = certified_order(base.at(m, c), base.at(best, c), c, "envelope tail min");
      if (o == Ord::lt) best = m;
    }
    std::lock_guard<std::mutex> lock(*mu);
    argmin_cache->emplace(n, best);
    return best;
  };

  WeightFn::Evaluator ev = [argmin_at, base](const Int& n, unsigned prec,
                                             const Config& c) -> std::optional<Ival> {
    Int m = argmin_at(n, c);
    return base.eval(m, prec, c);
  };
  // the original witness still works: beyond it every tail value is >= T
  WeightFn::Witness w = [base](const Rat& T, const Config& c) {
    return base.divergence_witness(T, c);
  };
  WeightFn out("envelope(" + g.dsl() + ")", std::move(ev), std::move(w), true);
  if (g.exact_valued()) out.with_exact_values();
  return out;
}

// ---------------------------------------------------------------------------
// Built-in zoo.
// ---------------------------------------------------------------------------

inline ModulusFn modulus_identity() { return ModulusFn("x", Expr::var(), true); }

inline ModulusFn modulus_log1p() {
  return ModulusFn("log(1+x)",
                   Expr::node(Expr::Kind::Log, Expr::node(Expr::Kind::Add, Expr::constant(Rat(1)), Expr::var())),
                   true);
}

inline ModulusFn modulus_pow(const Int& p, const Int& q) {
  if (p <= 0 || q <= 0) throw DomainError("modulus_pow: exponent must be positive");
  std::string d = "x^(" + p.str() + "/" + q.str() + ")";
  if (q == 1) d = p == 1 ? "x" : "x^" + p.str();
  return ModulusFn(d, Expr::node(Expr::Kind::Pow, Expr::var(), Expr::constant(Rat(p, q))),
                   true);
}

/// x/(1+x): a bounded modulus; fails unbounded-dependent operations with a
/// capability error, which is the intended behavior.
inline ModulusFn modulus_saturating() {
  return ModulusFn("x/(1+x)",
                   Expr::node(Expr::Kind::Div, Expr::var(),
                              Expr::node(Expr::Kind::Add, Expr::constant(Rat(1)), Expr::var())),
                   false);
}

inline WeightFn weight_n() {
  WeightFn::Evaluator ev = [](const Int& n, unsigned, const Config&) { return Ival(Rat(n)); };
  WeightFn::Witness w = [](const Rat& T, const Config&) {
    Int c = ceil_rat(T);
    return c < 1 ? Int(1) : c;
  };
  return WeightFn("n", std::move(ev), std::move(w), true)
      .with_shape(FnShape::identity())
      .with_exact_values();
}

inline WeightFn weight_sqrt() {
  WeightFn::Evaluator ev = [](const Int& n, unsigned prec, const Config&) {
    return sqrt_ival(Ival(Rat(n)), prec);
  };
  WeightFn::Witness w = [](const Rat& T, const Config&) {
    if (T <= 0) return Int(1);
    Int c = ceil_rat(T * T);
    return c < 1 ? Int(1) : c;
  };
  return WeightFn("sqrt(n)", std::move(ev), std::move(w), true).with_shape(FnShape::powrat(1, 2));
}

inline WeightFn weight_log1p() {
  ExprPtr e = Expr::node(Expr::Kind::Log, Expr::node(Expr::Kind::Add, Expr::constant(Rat(1)), Expr::var()));
  WeightFn::Evaluator ev = [e](const Int& n, unsigned prec, const Config& cfg) {
    return eval_real(e, Rat(n), prec, cfg);
  };
  // log(1+n) >= T for n >= 2^k with k*ln2 >= T; use a certified lower bound of ln2
  WeightFn::Witness w = [](const Rat& T, const Config&) -> Int {
    if (T <= 0) return Int(1);
    Ival l2 = ln_ival(Rat(2), 64);
    Int k = ceil_rat(T / l2.lo);
    return pow2(k.convert_to<unsigned>());
  };
  return WeightFn("log(1+n)", std::move(ev), std::move(w), true).with_shape(FnShape::log1p());
}

inline WeightFn weight_pow(const Int& p, const Int& q) {
  if (p <= 0 || q <= 0) throw DomainError("weight_pow: exponent must be positive");
  std::string d = "n^(" + p.str() + "/" + q.str() + ")";
  ExprPtr e = Expr::node(Expr::Kind::Pow, Expr::var(), Expr::constant(Rat(p, q)));
  WeightFn::Evaluator ev = [e](const Int& n, unsigned prec, const Config& cfg) {
    return eval_real(e, Rat(n), prec, cfg);
  };
  // g(n) >= T for all n >= ceil(T^(q/p))
  Int pc = p, qc = q;
  WeightFn::Witness w = [pc, qc](const Rat& T, const Config&) -> Int {
    if (T <= 0) return Int(1);
    unsigned pu = pc.convert_to<unsigned>();
    Int tn = boost::multiprecision::pow(num(T), qc.convert_to<unsigned>());
    Int td = boost::multiprecision::pow(den(T), qc.convert_to<unsigned>());
    // smallest n with n^p >= tn/td
    Int n = iroot_floor(ceil_div(tn, td), pu);
    while (boost::multiprecision::pow(n, pu) * td < tn) ++n;
    return n < 1 ? Int(1) : n;
  };
  return WeightFn(d, std::move(ev), std::move(w), true).with_shape(FnShape::powrat(pc, qc));
}

/// Piecewise weight: g(n) = value on (lo, hi], and g(n) = n off all blocks.
/// The shape of the constructed weights in the separation results.
struct WeightBlock {
  Int lo, hi, value;  // g(n) = value for lo < n <= hi
};

inline WeightFn weight_blocks(std::vector<WeightBlock> blocks) {
  std::sort(blocks.begin(), blocks.end(),
            [](const WeightBlock& a, const WeightBlock& b) { return a.lo < b.lo; });
  std::string text = "blockweight {";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.lo >= b.hi) throw DomainError("weight_blocks: empty block");
    if (i > 0 && blocks[i - 1].hi > b.lo) throw DomainError("weight_blocks: overlapping blocks");
    if (i) text += ";";
    text += "(" + b.lo.str() + "," + b.hi.str() + "]:" + b.value.str();
  }
  text += "}";
  Int last_hi = blocks.empty() ? Int(0) : blocks.back().hi;
  auto table = std::make_shared<const std::vector<WeightBlock>>(std::move(blocks));

  auto raw = [table](const Int& n) -> Int {
    auto it = std::upper_bound(table->begin(), table->end(), n,
                               [](const Int& x, const WeightBlock& b) { return x < b.lo; });
    if (it != table->begin()) {
      const WeightBlock& b = *(it - 1);
      if (n > b.lo && n <= b.hi) return b.value;
    }
    return n;
  };
  // monotone iff the boundary corners of each block are ordered (identity
  // segments are increasing and block interiors are constant)
  bool nondecr = true;
  {
    std::vector<Int> corners{Int(1)};
    for (const auto& b : *table) {
      corners.push_back(b.lo);
      corners.push_back(b.lo + 1);
      corners.push_back(b.hi);
      corners.push_back(b.hi + 1);
    }
    std::sort(corners.begin(), corners.end());
    Int prev(-1);
    for (const auto& cpt : corners) {
      if (cpt < 1) continue;
      Int v = raw(cpt);
      if (v < prev) {
        nondecr = false;
        break;
      }
      prev = v;
    }
  }

  WeightFn::Evaluator ev = [raw](const Int& n, unsigned, const Config&) -> std::optional<Ival> {
    return Ival(Rat(raw(n)));
  };
  // finitely many blocks: beyond them g(n) = n, so a closed-form witness exists
  WeightFn::Witness w = [last_hi](const Rat& T, const Config&) -> Int {
    Int n0 = std::max(Int(last_hi + 1), ceil_rat(T));
    return n0 < 1 ? Int(1) : n0;
  };
  return WeightFn(text, std::move(ev), std::move(w), nondecr).with_exact_values();
}

inline WeightFn weight_floor_root(unsigned deg) {
  ExprPtr e = Expr::root(Expr::var(), deg);
  WeightFn::Evaluator ev = [e](const Int& n, unsigned prec, const Config& cfg) {
    return eval_real(e, Rat(n), prec, cfg);
  };
  WeightFn::Witness w = [deg](const Rat& T, const Config&) -> Int {
    if (T <= 0) return Int(1);
    Int t = ceil_rat(T);
    return boost::multiprecision::pow(t, deg);
  };
  return WeightFn("root(n," + std::to_string(deg) + ")", std::move(ev), std::move(w), true)
      .with_exact_values();
}

// ---------------------------------------------------------------------------
// Finite-scale evidence that g belongs to the weight class: g(n) -> infinity
// (via the witness) and n/g(n) bounded below on sampled points per decade.
// ---------------------------------------------------------------------------

struct WeightShapeRow {
  Int n;
  Rat ratio_lower;  // certified lower bound of n/g(n)
  bool meets_bound;
};

struct WeightShapeReport {
  std::vector<WeightShapeRow> rows;
  bool diverges_evidence;
  bool all_decades_pass() const {
    for (const auto& r : rows)
      if (!r.meets_bound) return false;
    return true;
  }
};

inline WeightShapeReport weight_shape_report(const WeightFn& g, unsigned decades,
                                             const Config& cfg = default_config()) {
  WeightShapeReport rep{};
  Int n = 1;
  for (unsigned d = 0; d <= decades; ++d, n *= 10) {
    Rat best(-1);
    for (const Int& probe : {Int(n), Int(2 * n), Int(5 * n)}) {
      Ival gv = eval_refined(g.at(probe, cfg), cfg.prec_start, cfg, "g shape probe");
      if (gv.hi <= 0) continue;
      Rat lower = Rat(probe) / gv.hi;
      best = std::max(best, lower);
    }
    rep.rows.push_back({n, best, best >= cfg.gshape_bound});
  }
  rep.diverges_evidence = false;
  if (g.has_witness()) {
    Int w = g.divergence_witness(Rat(1000), cfg);
    EvalFn fn = g.at(w, cfg);
    rep.diverges_evidence = certified_order(fn, Rat(1000), cfg, "divergence evidence") != Ord::lt;
  }
  return rep;
}

}  // namespace charsub
