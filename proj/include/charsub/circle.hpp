#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charsub/nset.hpp"

namespace charsub {

// ---------------------------------------------------------------------------
// ArithSeq: ratio stream q_n >= 2 with prefix products a_n = q_1...q_n.
// Fractional parts are evaluated from ratio windows; a_n itself is only
// materialized for small n (round trips, CSV dumps).
// ---------------------------------------------------------------------------

class ArithSeq {
 public:
  using RatioFn = std::function<Int(const Int& n, const Config&)>;

  ArithSeq() = default;
  ArithSeq(RatioFn fn, std::string dsl_text, std::optional<Int> bound)
      : state_(std::make_shared<State>()), fn_(std::move(fn)), dsl_(std::move(dsl_text)),
        bound_(std::move(bound)) {}

  static ArithSeq const_ratio(Int q) {
    if (q < 2) throw DomainError("arithmetic sequence needs q_n >= 2");
    std::string text = "const-ratio " + q.str();
    Int qq = q;
    return ArithSeq([qq](const Int&, const Config&) { return qq; }, text, qq);
  }

  /// q_n given by an integer expression over n; q_n >= 2 validated lazily.
  static ArithSeq from_expr(const ExprPtr& e, std::optional<Int> declared_bound) {
    std::string text = "ratio " + expr_str(e, "n");
    if (declared_bound) text += " bounded " + declared_bound->str();
    auto fn = [e](const Int& n, const Config& cfg) -> Int {
      IntVal v = eval_int(e, n, cfg);
      if (!v.finite()) throw CapError("ratio q_n past the magnitude cap at n=" + n.str());
      return v.v;
    };
    return ArithSeq(std::move(fn), text, std::move(declared_bound));
  }

  Int ratio(const Int& n, const Config& cfg = default_config()) const {
    if (n < 1) throw DomainError("ratio index below 1");
    Int q = fn_(n, cfg);
    if (q < 2) throw StructureError("ratio q_n = " + q.str() + " < 2 at n=" + n.str());
    if (bound_ && q > *bound_)
      throw StructureError("declared bound violated: q_" + n.str() + " = " + q.str());
    return q;
  }

  /// a_n (a_0 = 1); cached for small n only.
  Int prefix_product(const Int& n, const Config& cfg = default_config()) const {
    if (n < 0) throw DomainError("prefix product index below 0");
    if (n == 0) return 1;
    std::lock_guard<std::mutex> lock(state_->mu);
    auto& cache = state_->prods;
    if (cache.empty()) cache.push_back(Int(1));  // a_0
    std::size_t want = n.convert_to<std::size_t>();
    while (cache.size() <= want) {
      Int idx = Int(cache.size());
      cache.push_back(cache.back() * fn_(idx, cfg));
      if (bit_length(cache.back()) > 64u * cfg.magnitude_cap_bits)
        throw CapError("prefix product exceeded the working cap at n=" + idx.str());
    }
    return cache[want];
  }

  std::optional<Int> bound() const { return bound_; }
  const std::string& dsl() const { return dsl_; }

 private:
  struct State {
    std::mutex mu;
    std::vector<Int> prods;
  };
  std::shared_ptr<State> state_;
  RatioFn fn_;
  std::string dsl_;
  std::optional<Int> bound_;
};

// ---------------------------------------------------------------------------
// Digit rules for support-built elements.
// ---------------------------------------------------------------------------

struct DigitRule {
  enum class Kind { max, half, nearhalf, constv, custom };
  Kind kind = Kind::max;
  Int v;  // constv
  std::function<Int(const Int& n, const Int& qn)> custom;

  static DigitRule maxrule() { return {Kind::max, 0, nullptr}; }
  static DigitRule halfrule() { return {Kind::half, 0, nullptr}; }
  /// Largest digit with c/q strictly below 1/2: ceil(q/2) - 1.
  static DigitRule nearhalfrule() { return {Kind::nearhalf, 0, nullptr}; }
  static DigitRule construle(Int value) { return {Kind::constv, std::move(value), nullptr}; }

  Int digit(const Int& n, const Int& qn) const {
    switch (kind) {
      case Kind::max: return qn - 1;
      case Kind::half: return qn / 2;
      case Kind::nearhalf: return ceil_div(qn, Int(2)) - 1;
      case Kind::constv: return v;
      case Kind::custom: return custom(n, qn);
    }
    throw Error("unreachable");
  }

  std::string dsl() const {
    switch (kind) {
      case Kind::max: return "max";
      case Kind::half: return "half";
      case Kind::nearhalf: return "nearhalf";
      case Kind::constv: return "const " + v.str();
      case Kind::custom: return "custom";
    }
    return "?";
  }
};

// ---------------------------------------------------------------------------
// CircleElem: an element of the circle, either an exact rational in [0,1) or
// a digit stream built from (support, rule).
// ---------------------------------------------------------------------------

struct DigitBlock {
  std::vector<Int> digits;  // c_1..c_N
  Rat remainder;            // x_N = {a_N x}, exact
};

/// Greedy canonical expansion of an exact rational (Cantor-type long division):
/// c_n = floor(q_n x_{n-1}), x_n = q_n x_{n-1} - c_n.
inline DigitBlock canonical_digits(const Rat& x, const ArithSeq& seq, const Int& N,
                                   const Config& cfg = default_config()) {
  if (x < 0 || x >= 1) throw DomainError("canonical_digits: x outside [0,1)");
  DigitBlock out;
  Rat state = x;
  for (Int n = 1; n <= N; ++n) {
    Int q = seq.ratio(n, cfg);
    Rat t = state * q;
    Int c = floor_rat(t);
    out.digits.push_back(c);
    state = t - c;
  }
  out.remainder = state;
  return out;
}

class CircleElem {
 public:
  CircleElem() = default;

  static CircleElem rational(Rat x) {
    if (x < 0 || x >= 1) throw DomainError("circle element: rational outside [0,1)");
    CircleElem e;
    e.rat_ = std::move(x);
    e.dsl_ = "rational " + rat_str(*e.rat_);
    e.memo_ = std::make_shared<Memo>();
    return e;
  }

  static CircleElem from_support(NSet support, DigitRule rule) {
    CircleElem e;
    e.support_ = std::move(support);
    e.rule_ = std::move(rule);
    e.dsl_ = "support " + e.support_->dsl() + " rule " + e.rule_->dsl();
    e.memo_ = std::make_shared<Memo>();
    return e;
  }

  bool is_rational() const { return rat_.has_value(); }
  const Rat& rational_value() const { return *rat_; }
  const std::optional<NSet>& support_set() const { return support_; }
  const std::string& dsl() const { return dsl_; }

  /// c_n in the canonical representation w.r.t. seq.
  Int digit(const ArithSeq& seq, const Int& n, const Config& cfg = default_config()) const {
    Int q = seq.ratio(n, cfg);
    if (rat_) {
      auto st = greedy_state(seq, cfg);
      std::lock_guard<std::mutex> lock(st->mu);
      extend_greedy(*st, seq, n, cfg);
      return st->digits[n.convert_to<std::size_t>() - 1];
    }
    if (!support_->member(n, cfg)) return 0;
    Int c = rule_->digit(n, q);
    if (c < 1 || c >= q)
      throw StructureError("digit rule gives c_" + n.str() + " = " + c.str() +
                           " outside [1, q_n-1] on a support point");
    return c;
  }

  /// Exact {a_n x} for rational elements: (a_n p mod q) / q via incremental
  /// modular products; the independent route the digit tails are checked
  /// against.
  Rat frac_exact(const ArithSeq& seq, const Int& n, const Config& cfg = default_config()) const {
    if (!rat_) throw CapabilityError("frac_exact needs an exact rational element");
    const Int& q = den(*rat_);
    auto st = modular_state(seq, cfg);
    std::lock_guard<std::mutex> lock(st->mu);
    std::size_t want = n.convert_to<std::size_t>();
    if (st->mods.empty()) st->mods.push_back(num(*rat_) % q);  // a_0 = 1
    while (st->mods.size() <= want) {
      Int idx = Int(st->mods.size());
      st->mods.push_back(st->mods.back() * seq.ratio(idx, cfg) % q);
    }
    return Rat(st->mods[want], q);
  }

 private:
  struct GreedyState {
    std::mutex mu;
    std::vector<Int> digits;
    Rat state;  // x_k after the last cached digit
    bool inited = false;
  };
  struct ModularState {
    std::mutex mu;
    std::vector<Int> mods;  // a_k * p mod q
  };
  struct Memo {
    std::mutex mu;
    std::map<std::string, std::shared_ptr<GreedyState>> greedy;
    std::map<std::string, std::shared_ptr<ModularState>> modular;
  };

  std::shared_ptr<GreedyState> greedy_state(const ArithSeq& seq, const Config&) const {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto& slot = memo_->greedy[seq.dsl()];
    if (!slot) slot = std::make_shared<GreedyState>();
    return slot;
  }
  std::shared_ptr<ModularState> modular_state(const ArithSeq& seq, const Config&) const {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto& slot = memo_->modular[seq.dsl()];
    if (!slot) slot = std::make_shared<ModularState>();
    return slot;
  }

  void extend_greedy(GreedyState& st, const ArithSeq& seq, const Int& n, const Config& cfg) const {
    if (!st.inited) {
      st.state = *rat_;
      st.inited = true;
    }
    std::size_t want = n.convert_to<std::size_t>();
    while (st.digits.size() < want) {
      Int idx = Int(st.digits.size()) + 1;
      Rat t = st.state * seq.ratio(idx, cfg);
      Int c = floor_rat(t);
      st.digits.push_back(c);
      st.state = t - c;
    }
  }

  std::optional<Rat> rat_;
  std::optional<NSet> support_;
  std::optional<DigitRule> rule_;
  std::string dsl_;
  std::shared_ptr<Memo> memo_;
};

// ---------------------------------------------------------------------------
// Fractional parts and norms from digit tails. {a_n x} is approximated by
// s = sum_{k=n+1}^{n+K} c_k * a_n/a_k with telescoped denominators
// q_{n+1}...q_k; the true value lies in [s, s + 1/(q_{n+1}...q_{n+K})].
// ---------------------------------------------------------------------------

/// Interval [s, s+t] containing {a_n x}, with t = a_n/a_{n+K} <= 2^-K exactly.
inline Ival frac_eval(const CircleElem& x, const ArithSeq& seq, const Int& n, unsigned K,
                      const Config& cfg = default_config()) {
  // backward Horner: t_j = (t_{j+1} + c_{n+j}) / q_{n+j}
  Int numer = 0, denom = 1;
  for (Int k = n + Int(K); k > n; --k) {
    Int c = x.digit(seq, k, cfg);
    Int q = seq.ratio(k, cfg);
    numer += c * denom;
    denom *= q;
    // keep numer/denom as the value of the tail starting at k (implicitly
    // divided by denom); next step shifts the window left
  }
  Rat s(numer, denom);
  Rat width(Int(1), denom);
  return Ival{s, s + width};
}

/// Interval for ||a_n x|| = min({a_n x}, 1 - {a_n x}).
inline Ival norm_from_frac(const Ival& frac) {
  const Rat half(1, 2);
  if (frac.hi <= half) return frac;
  if (frac.lo >= half) return Ival{Rat(1) - frac.hi, Rat(1) - frac.lo};
  return Ival{std::min(frac.lo, Rat(Rat(1) - frac.hi)), half};
}

inline Ival norm_dist(const CircleElem& x, const ArithSeq& seq, const Int& n, unsigned K,
                      const Config& cfg = default_config()) {
  return norm_from_frac(frac_eval(x, seq, n, K, cfg));
}

inline Rat norm_exact(const CircleElem& x, const ArithSeq& seq, const Int& n,
                      const Config& cfg = default_config()) {
  Rat f = x.frac_exact(seq, n, cfg);
  return std::min(f, Rat(Rat(1) - f));
}

/// Exact support prefix supp(x) intersect [1, N] as an explicit interval set.
inline NSet support_prefix(const CircleElem& x, const ArithSeq& seq, const Int& N,
                           const Config& cfg = default_config()) {
  if (!x.is_rational() && x.support_set()) {
    auto ivs = x.support_set()->intervals_in(1, N, cfg);
    std::vector<std::pair<Int, Int>> out;
    for (const auto& iv : ivs) out.emplace_back(iv.lo, iv.hi_or(N));
    return nset_intervals(std::move(out));
  }
  std::vector<std::pair<Int, Int>> runs;
  for (Int n = 1; n <= N; ++n) {
    if (x.digit(seq, n, cfg) != 0) {
      if (!runs.empty() && runs.back().second == n - 1) runs.back().second = n;
      else runs.emplace_back(n, n);
    }
  }
  return nset_intervals(std::move(runs));
}

/// Finite rendering of "c_n < q_n - 1 infinitely often": within every window
/// of `window` digits in [1, upto], at least one digit is below q_n - 1.
inline bool canonical_in_windows(const CircleElem& x, const ArithSeq& seq, const Int& upto,
                                 unsigned window, const Config& cfg = default_config()) {
  Int run = 0;
  for (Int n = 1; n <= upto; ++n) {
    if (x.digit(seq, n, cfg) == seq.ratio(n, cfg) - 1) {
      if (++run >= window) return false;
    } else {
      run = 0;
    }
  }
  return true;
}

/// Partial-rational view: value = sum_{n<=D} c_n/a_n, with
/// 0 <= x - value < err = 1/a_D exactly.
struct ApproxElem {
  Rat value;
  Rat err;
  Int depth;
};

inline ApproxElem partial_rational(const CircleElem& x, const ArithSeq& seq, const Int& D,
                                   const Config& cfg = default_config()) {
  Int numer = 0, denom = 1;
  for (Int k = D; k >= 1; --k) {
    numer += x.digit(seq, k, cfg) * denom;
    denom *= seq.ratio(k, cfg);
  }
  return ApproxElem{Rat(numer, denom), Rat(Int(1), denom), D};
}

}  // namespace charsub
