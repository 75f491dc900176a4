#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charsub/circle.hpp"
#include "charsub/funcs.hpp"
#include "charsub/nset.hpp"

namespace charsub {

// ---------------------------------------------------------------------------
// Recursive-descent parsers for the text DSL. One dialect for integer
// expressions (set generators, ratio streams) and one for real-valued
// function expressions (moduli, weights); see README for the grammar.
// ---------------------------------------------------------------------------

namespace dsl {

class Parser {
 public:
  explicit Parser(std::string text) : s_(std::move(text)) {}

  void ws() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool eof() {
    ws();
    return p_ >= s_.size();
  }
  char peek() {
    ws();
    return p_ < s_.size() ? s_[p_] : '\0';
  }
  bool try_eat(char c) {
    ws();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  void eat(char c) {
    if (!try_eat(c)) fail(std::string("expected '") + c + "'");
  }
  bool try_keyword(const std::string& kw) {
    ws();
    std::size_t save = p_;
    if (s_.compare(p_, kw.size(), kw) == 0) {
      std::size_t end = p_ + kw.size();
      if (end >= s_.size() || !is_ident_char(s_[end])) {
        p_ = end;
        return true;
      }
    }
    p_ = save;
    return false;
  }
  void keyword(const std::string& kw) {
    if (!try_keyword(kw)) fail("expected '" + kw + "'");
  }
  std::string ident() {
    ws();
    std::size_t start = p_;
    while (p_ < s_.size() && is_ident_char(s_[p_])) ++p_;
    if (start == p_) fail("expected identifier");
    return s_.substr(start, p_ - start);
  }
  Int integer() {
    ws();
    std::size_t start = p_;
    bool neg = try_eat('-');
    ws();
    std::size_t dstart = p_;
    while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) ++p_;
    if (dstart == p_) fail("expected integer");
    // e-notation shorthand: 1e6
    if (p_ < s_.size() && (s_[p_] == 'e' || s_[p_] == 'E') && p_ + 1 < s_.size() &&
        std::isdigit(static_cast<unsigned char>(s_[p_ + 1]))) {
      ++p_;
      while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) ++p_;
    }
    Int v = parse_int(s_.substr(dstart, p_ - dstart));
    (void)start;
    return neg ? Int(-v) : v;
  }
  Rat rational() {
    Int p = integer();
    if (try_eat('/')) return Rat(p, integer());
    return Rat(p);
  }
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, p_); }
  void expect_end() {
    if (!eof()) fail("trailing input");
  }
  std::size_t pos() const { return p_; }

 private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }
  std::string s_;
  std::size_t p_ = 0;
};

// ---- expressions -----------------------------------------------------------

struct ExprDialect {
  bool real;            // division, log, sqrt allowed
  std::string varname;  // the single free variable
};

inline ExprPtr parse_expr(Parser& p, const ExprDialect& d);

inline ExprPtr parse_atom(Parser& p, const ExprDialect& d) {
  if (p.try_eat('(')) {
    ExprPtr e = parse_expr(p, d);
    p.eat(')');
    return e;
  }
  if (p.try_eat('-')) {
    return Expr::node(Expr::Kind::Sub, Expr::constant(Rat(0)), parse_atom(p, d));
  }
  char c = p.peek();
  if (std::isdigit(static_cast<unsigned char>(c))) return Expr::constant(Rat(p.integer()));
  std::string id = p.ident();
  if (id == d.varname) return Expr::var();
  if (id == "log") {
    if (!d.real) p.fail("log is not allowed in integer expressions");
    p.eat('(');
    ExprPtr a = parse_expr(p, d);
    p.eat(')');
    return Expr::node(Expr::Kind::Log, a);
  }
  if (id == "sqrt") {
    if (!d.real) p.fail("sqrt is not allowed in integer expressions");
    p.eat('(');
    ExprPtr a = parse_expr(p, d);
    p.eat(')');
    return Expr::node(Expr::Kind::Sqrt, a);
  }
  if (id == "root") {
    p.eat('(');
    ExprPtr a = parse_expr(p, d);
    p.eat(',');
    Int deg = p.integer();
    if (deg < 1 || deg > 64) p.fail("root degree must be in [1, 64]");
    p.eat(')');
    return Expr::root(a, deg.convert_to<unsigned>());
  }
  p.fail("unknown identifier '" + id + "' (variable here is '" + d.varname + "')");
}

inline ExprPtr fold2(Expr::Kind k, const ExprPtr& a, const ExprPtr& b) {
  if (a->kind == Expr::Kind::Const && b->kind == Expr::Kind::Const) {
    switch (k) {
      case Expr::Kind::Add: return Expr::constant(a->cval + b->cval);
      case Expr::Kind::Sub: return Expr::constant(a->cval - b->cval);
      case Expr::Kind::Mul: return Expr::constant(a->cval * b->cval);
      case Expr::Kind::Div:
        if (b->cval == 0) throw DomainError("division by zero constant");
        return Expr::constant(a->cval / b->cval);
      default: break;
    }
  }
  return Expr::node(k, a, b);
}

inline ExprPtr parse_factor(Parser& p, const ExprDialect& d) {
  ExprPtr a = parse_atom(p, d);
  if (p.try_eat('^')) {
    ExprPtr b = parse_factor(p, d);  // right associative
    if (d.real && b->kind != Expr::Kind::Const)
      p.fail("exponent must be a rational constant in function expressions");
    return Expr::node(Expr::Kind::Pow, a, b);
  }
  return a;
}

inline ExprPtr parse_term(Parser& p, const ExprDialect& d) {
  ExprPtr a = parse_factor(p, d);
  while (true) {
    if (p.try_eat('*')) a = fold2(Expr::Kind::Mul, a, parse_factor(p, d));
    else if (d.real && p.try_eat('/')) a = fold2(Expr::Kind::Div, a, parse_factor(p, d));
    else return a;
  }
}

inline ExprPtr parse_expr(Parser& p, const ExprDialect& d) {
  ExprPtr a = parse_term(p, d);
  while (true) {
    if (p.try_eat('+')) a = fold2(Expr::Kind::Add, a, parse_term(p, d));
    else if (p.try_eat('-')) a = fold2(Expr::Kind::Sub, a, parse_term(p, d));
    else return a;
  }
}

// ---- sets ------------------------------------------------------------------

inline NSet parse_set(Parser& p);

inline NSet parse_set_atom(Parser& p) {
  if (p.try_eat('{')) {
    std::vector<Int> xs;
    if (!p.try_eat('}')) {
      xs.push_back(p.integer());
      while (p.try_eat(',')) xs.push_back(p.integer());
      p.eat('}');
    }
    return nset_finite(std::move(xs));
  }
  if (p.try_keyword("empty")) return nset_empty();
  if (p.try_keyword("progression")) {
    p.eat('(');
    Int a = p.integer();
    p.eat(',');
    Int d = p.integer();
    p.eat(')');
    return nset_progression(std::move(a), std::move(d));
  }
  if (p.try_keyword("intervals")) {
    p.eat('{');
    std::vector<std::pair<Int, Int>> ivs;
    if (!p.try_eat('}')) {
      do {
        p.eat('[');
        Int lo = p.integer();
        p.eat(',');
        Int hi = p.integer();
        p.eat(']');
        if (hi < lo) p.fail("interval with hi < lo");
        ivs.emplace_back(std::move(lo), std::move(hi));
      } while (p.try_eat(','));
      p.eat('}');
    }
    return nset_intervals(std::move(ivs));
  }
  if (p.try_keyword("shift")) {
    p.eat('(');
    NSet base = parse_set(p);
    p.eat(',');
    Int i = p.integer();
    p.eat(')');
    if (i < 0) p.fail("shift offset must be >= 0");
    return nset_shift(base, std::move(i));
  }
  if (p.try_keyword("intersect")) {
    p.eat('(');
    NSet a = parse_set(p);
    p.eat(',');
    NSet b = parse_set(p);
    p.eat(')');
    return nset_intersect(a, b);
  }
  if (p.try_keyword("complement")) {
    p.eat('(');
    NSet a = parse_set(p);
    p.eat(')');
    return nset_complement(a);
  }
  if (p.try_keyword("union")) {
    if (p.try_eat('(')) {
      NSet a = parse_set(p);
      p.eat(',');
      NSet b = parse_set(p);
      p.eat(')');
      return nset_union(a, b);
    }
    std::string var = p.ident();
    p.keyword("in");
    Int start = p.integer();
    if (start != 1) p.fail("generator index must start at 1");
    p.eat('.');
    p.eat('.');
    std::optional<Int> kmax;
    if (std::isdigit(static_cast<unsigned char>(p.peek()))) kmax = p.integer();
    p.eat(':');
    p.eat('[');
    ExprDialect d{false, var};
    ExprPtr lo = parse_expr(p, d);
    p.eat(',');
    ExprPtr hi = parse_expr(p, d);
    p.eat(']');
    std::string text = "union k in 1.." + (kmax ? kmax->str() : "") + " : [" +
                       expr_str(lo, "k") + "," + expr_str(hi, "k") + "]";
    return nset_interval_union(lo, hi, kmax, text);
  }
  p.fail("expected a set expression");
}

inline NSet parse_set(Parser& p) { return parse_set_atom(p); }

inline NSet parse_nset(const std::string& text) {
  Parser p(text);
  NSet s = parse_set(p);
  p.expect_end();
  return s;
}

// ---- moduli and weights ----------------------------------------------------

inline bool is_one_plus_var(const ExprPtr& e) {
  return e->kind == Expr::Kind::Add &&
         ((e->a->kind == Expr::Kind::Const && e->a->cval == 1 && e->b->kind == Expr::Kind::Var) ||
          (e->b->kind == Expr::Kind::Const && e->b->cval == 1 && e->a->kind == Expr::Kind::Var));
}

/// g(n) = max(|A cap [1,n]|, 1): the step weight built from an enumerable
/// infinite set A = {n_1 < n_2 < ...} (value k on [n_k, n_{k+1})).
inline WeightFn weight_count_of(const NSet& a) {
  NSet set = a;
  WeightFn::Evaluator ev = [set](const Int& n, unsigned, const Config& cfg) -> std::optional<Ival> {
    Int c = set.count(n, cfg);
    if (c < 1) c = 1;
    return Ival(Rat(c));
  };
  // the T-th member witnesses: count(n) >= T for all n >= n_T
  WeightFn::Witness w = [set](const Rat& T, const Config& cfg) -> Int {
    Int t = ceil_rat(T);
    if (t < 1) t = 1;
    auto st = set.stream(cfg);
    Int cum = 0, steps = 0;
    while (auto iv = st->next()) {
      if (++steps > cfg.generator_budget)
        throw BudgetError("countweight witness exceeded the stream budget");
      if (!iv->bounded()) return Int(iv->lo + (t - cum) - 1);
      Int len = *iv->hi - iv->lo + 1;
      if (cum + len >= t) return Int(iv->lo + (t - cum) - 1);
      cum += len;
    }
    throw CapabilityError("countweight: set exhausted before " + t.str() +
                          " members; weight does not diverge");
  };
  return WeightFn("countweight " + a.dsl(), std::move(ev), std::move(w), true)
      .with_exact_values();
}

inline ModulusFn parse_modulus(const std::string& text) {
  Parser p(text);
  ExprDialect d{true, "x"};
  ExprPtr e = parse_expr(p, d);
  p.expect_end();
  using K = Expr::Kind;
  if (e->kind == K::Var) return modulus_identity();
  if (e->kind == K::Log && is_one_plus_var(e->a)) return modulus_log1p();
  if (e->kind == K::Sqrt && e->a->kind == K::Var) return modulus_pow(1, 2);
  if (e->kind == K::Pow && e->a->kind == K::Var && e->b->kind == K::Const && e->b->cval > 0)
    return modulus_pow(num(e->b->cval), den(e->b->cval));
  if (e->kind == K::Div && e->a->kind == K::Var && is_one_plus_var(e->b))
    return modulus_saturating();
  // user-defined: axioms are validated at sample scale, unboundedness assumed
  return ModulusFn(expr_str(e, "x"), e, true);
}

inline WeightFn parse_weight(const std::string& text);

inline WeightFn parse_weight_inner(Parser& p) {
  if (p.try_keyword("blockweight")) {
    p.eat('{');
    std::vector<WeightBlock> blocks;
    if (!p.try_eat('}')) {
      do {
        p.eat('(');
        Int lo = p.integer();
        p.eat(',');
        Int hi = p.integer();
        p.eat(']');
        p.eat(':');
        Int v = p.integer();
        blocks.push_back({std::move(lo), std::move(hi), std::move(v)});
      } while (p.try_eat(';'));
      p.eat('}');
    }
    return weight_blocks(std::move(blocks));
  }
  if (p.try_keyword("countweight")) {
    NSet a = parse_set(p);
    return weight_count_of(a);
  }
  if (p.try_keyword("envelope")) {
    p.eat('(');
    WeightFn inner = parse_weight_inner(p);
    p.eat(')');
    return monotone_envelope(inner);
  }
  ExprDialect d{true, "n"};
  ExprPtr e = parse_expr(p, d);
  using K = Expr::Kind;
  if (e->kind == K::Var) return weight_n();
  if (e->kind == K::Sqrt && e->a->kind == K::Var) return weight_sqrt();
  if (e->kind == K::Log && is_one_plus_var(e->a)) return weight_log1p();
  if (e->kind == K::Pow && e->a->kind == K::Var && e->b->kind == K::Const && e->b->cval > 0)
    return weight_pow(num(e->b->cval), den(e->b->cval));
  if (e->kind == K::Root && e->a->kind == K::Var) return weight_floor_root(e->deg);
  // general expression: assumed non-decreasing, witness by monotone search
  return weight_from_expr(expr_str(e, "n"), e, true);
}

inline WeightFn parse_weight(const std::string& text) {
  Parser p(text);
  WeightFn g = parse_weight_inner(p);
  p.expect_end();
  return g;
}

// ---- sequences and elements --------------------------------------------------

inline ArithSeq parse_seq(const std::string& text) {
  Parser p(text);
  ArithSeq out;
  if (p.try_keyword("const")) {
    p.eat('-');
    p.keyword("ratio");
    Int q = p.integer();
    out = ArithSeq::const_ratio(std::move(q));
  } else if (p.try_keyword("ratio")) {
    ExprDialect d{false, "n"};
    ExprPtr e = parse_expr(p, d);
    std::optional<Int> bound;
    if (p.try_keyword("bounded")) bound = p.integer();
    out = ArithSeq::from_expr(e, std::move(bound));
  } else {
    p.fail("expected 'const-ratio q' or 'ratio <expr>'");
  }
  p.expect_end();
  return out;
}

inline DigitRule parse_rule(Parser& p) {
  if (p.try_keyword("max")) return DigitRule::maxrule();
  if (p.try_keyword("half")) return DigitRule::halfrule();
  if (p.try_keyword("nearhalf")) return DigitRule::nearhalfrule();
  if (p.try_keyword("const")) return DigitRule::construle(p.integer());
  p.fail("expected digit rule: max | half | nearhalf | const v");
}

inline CircleElem parse_elem(const std::string& text) {
  Parser p(text);
  CircleElem out;
  if (p.try_keyword("rational")) {
    Rat x = p.rational();
    out = CircleElem::rational(std::move(x));
  } else if (p.try_keyword("support")) {
    NSet a = parse_set(p);
    p.keyword("rule");
    DigitRule r = parse_rule(p);
    out = CircleElem::from_support(std::move(a), std::move(r));
  } else {
    p.fail("expected 'rational p/q' or 'support <set> rule <rule>'");
  }
  p.expect_end();
  return out;
}

// ---- checkpoint schedules ----------------------------------------------------

struct CheckpointSpec {
  enum class Kind { geo, list, blocks } kind;
  Int a, b, factor;       // geo
  std::vector<Int> list;  // list
  Int K;                  // blocks
};

inline CheckpointSpec parse_checkpoints(const std::string& text) {
  Parser p(text);
  CheckpointSpec out{};
  if (p.try_keyword("geo")) {
    p.eat(':');
    out.kind = CheckpointSpec::Kind::geo;
    out.a = p.integer();
    p.eat('.');
    p.eat('.');
    out.b = p.integer();
    out.factor = 10;
    if (p.try_eat(':')) out.factor = p.integer();
    if (out.a < 1 || out.b < out.a || out.factor < 2) p.fail("bad geometric schedule");
  } else if (p.try_keyword("list")) {
    p.eat(':');
    out.kind = CheckpointSpec::Kind::list;
    out.list.push_back(p.integer());
    while (p.try_eat(',')) out.list.push_back(p.integer());
  } else if (p.try_keyword("blocks")) {
    p.eat(':');
    out.kind = CheckpointSpec::Kind::blocks;
    out.K = p.integer();
    if (out.K < 1) p.fail("blocks:K needs K >= 1");
  } else {
    p.fail("expected geo:..., list:..., or blocks:K");
  }
  p.expect_end();
  return out;
}

}  // namespace dsl

using dsl::parse_checkpoints;
using dsl::parse_elem;
using dsl::parse_modulus;
using dsl::parse_nset;
using dsl::parse_seq;
using dsl::parse_weight;
using dsl::weight_count_of;

}  // namespace charsub
