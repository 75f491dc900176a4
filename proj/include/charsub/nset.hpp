#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charsub/expr.hpp"

namespace charsub {

/// Closed interval of naturals [lo, hi]; hi == nullopt means unbounded.
struct Iv {
  Int lo;
  std::optional<Int> hi;

  Iv(Int l, Int h) : lo(std::move(l)), hi(std::move(h)) {}
  Iv(Int l, std::optional<Int> h) : lo(std::move(l)), hi(std::move(h)) {}
  bool bounded() const { return hi.has_value(); }
  Int hi_or(const Int& cap) const { return hi ? std::min(*hi, cap) : cap; }
  bool contains(const Int& n) const { return n >= lo && (!hi || n <= *hi); }
};

/// Lazy stream of disjoint intervals in strictly increasing order
/// (r_i < l_{i+1}; adjacency allowed as separate entries).
class IvStream {
 public:
  virtual ~IvStream() = default;
  /// nullopt = no further intervals within caps/budget.
  virtual std::optional<Iv> next() = 0;
  /// true when exhaustion was forced by a cap or budget rather than proven.
  virtual bool truncated() const { return false; }
};

class NSetImpl {
 public:
  virtual ~NSetImpl() = default;
  virtual Int count(const Int& n, const Config& cfg) const = 0;
  virtual bool member(const Int& n, const Config& cfg) const = 0;
  virtual std::optional<Int> next_member(const Int& from, const Config& cfg) const = 0;
  virtual std::unique_ptr<IvStream> stream(const Config& cfg) const = 0;
  virtual const std::string& dsl() const = 0;
};

/// Immutable handle to a symbolic subset of N = {1, 2, 3, ...}.
class NSet {
 public:
  NSet() = default;
  explicit NSet(std::shared_ptr<const NSetImpl> impl) : impl_(std::move(impl)) {}

  bool valid() const { return impl_ != nullptr; }

  /// |A intersect [1, n]|, exact; derived from interval endpoints, never by
  /// enumerating elements inside intervals.
  Int count(const Int& n, const Config& cfg = default_config()) const {
    if (n < 0) throw DomainError("prefix_count: negative index");
    if (n == 0) return 0;
    return impl_->count(n, cfg);
  }
  bool member(const Int& n, const Config& cfg = default_config()) const {
    if (n < 1) return false;
    return impl_->member(n, cfg);
  }
  /// Smallest member >= from, or nullopt if none within caps.
  std::optional<Int> next_member(const Int& from, const Config& cfg = default_config()) const {
    return impl_->next_member(std::max(Int(1), from), cfg);
  }
  std::unique_ptr<IvStream> stream(const Config& cfg = default_config()) const {
    return impl_->stream(cfg);
  }
  /// Disjoint intervals of A intersect [lo, hi], clipped.
  std::vector<Iv> intervals_in(const Int& lo, const Int& hi,
                               const Config& cfg = default_config()) const {
    std::vector<Iv> out;
    auto st = stream(cfg);
    while (true) {
      auto iv = st->next();
      if (!iv) {
        if (st->truncated()) throw BudgetError("intervals_in: stream truncated before hi");
        break;
      }
      if (iv->lo > hi) break;
      Int h = iv->hi_or(hi);
      if (h < lo) continue;
      out.emplace_back(std::max(iv->lo, lo), std::min(h, hi));
      if (!iv->bounded() || *iv->hi >= hi) break;
    }
    return out;
  }
  const std::string& dsl() const {
    static const std::string none = "<null>";
    return impl_ ? impl_->dsl() : none;
  }

  const std::shared_ptr<const NSetImpl>& impl_ptr() const { return impl_; }

 private:
  std::shared_ptr<const NSetImpl> impl_;
};

// ---------------------------------------------------------------------------
// Variant: finite list.
// ---------------------------------------------------------------------------

namespace detail {

class FiniteImpl final : public NSetImpl {
 public:
  explicit FiniteImpl(std::vector<Int> xs) : xs_(std::move(xs)) {
    std::sort(xs_.begin(), xs_.end());
    xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
    while (!xs_.empty() && xs_.front() < 1) xs_.erase(xs_.begin());
    std::string s = "{";
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (i) s += ",";
      s += xs_[i].str();
    }
    dsl_ = s + "}";
  }

  Int count(const Int& n, const Config&) const override {
    return Int(std::upper_bound(xs_.begin(), xs_.end(), n) - xs_.begin());
  }
  bool member(const Int& n, const Config&) const override {
    return std::binary_search(xs_.begin(), xs_.end(), n);
  }
  std::optional<Int> next_member(const Int& from, const Config&) const override {
    auto it = std::lower_bound(xs_.begin(), xs_.end(), from);
    if (it == xs_.end()) return std::nullopt;
    return *it;
  }
  std::unique_ptr<IvStream> stream(const Config&) const override;
  const std::string& dsl() const override { return dsl_; }

  const std::vector<Int>& elems() const { return xs_; }

 private:
  std::vector<Int> xs_;
  std::string dsl_;
};

class FiniteStream final : public IvStream {
 public:
  explicit FiniteStream(const std::vector<Int>& xs) : xs_(xs) {}
  std::optional<Iv> next() override {
    if (i_ >= xs_.size()) return std::nullopt;
    Int lo = xs_[i_], hi = lo;
    ++i_;
    while (i_ < xs_.size() && xs_[i_] == hi + 1) hi = xs_[i_++];
    return Iv{lo, hi};
  }

 private:
  const std::vector<Int>& xs_;
  std::size_t i_ = 0;
};

inline std::unique_ptr<IvStream> FiniteImpl::stream(const Config&) const {
  return std::make_unique<FiniteStream>(xs_);
}

// ---------------------------------------------------------------------------
// Variant: arithmetic progression {a, a+d, a+2d, ...}.
// ---------------------------------------------------------------------------

class ProgressionImpl final : public NSetImpl {
 public:
  ProgressionImpl(Int a, Int d) : a_(std::move(a)), d_(std::move(d)) {
    if (a_ < 1 || d_ < 1) throw DomainError("progression: start and step must be >= 1");
    dsl_ = "progression(" + a_.str() + "," + d_.str() + ")";
  }

  Int count(const Int& n, const Config&) const override {
    if (n < a_) return 0;
    return (n - a_) / d_ + 1;
  }
  bool member(const Int& n, const Config&) const override {
    return n >= a_ && (n - a_) % d_ == 0;
  }
  std::optional<Int> next_member(const Int& from, const Config&) const override {
    if (from <= a_) return a_;
    return a_ + ceil_div(from - a_, d_) * d_;
  }
  std::unique_ptr<IvStream> stream(const Config& cfg) const override;
  const std::string& dsl() const override { return dsl_; }

 private:
  Int a_, d_;
  std::string dsl_;
};

class ProgressionStream final : public IvStream {
 public:
  ProgressionStream(Int a, Int d, Int budget) : a_(std::move(a)), d_(std::move(d)), budget_(std::move(budget)) {}
  std::optional<Iv> next() override {
    if (d_ == 1) {
      if (k_ > 0) return std::nullopt;
      ++k_;
      return Iv{a_, std::nullopt};
    }
    if (k_ >= budget_) {
      trunc_ = true;
      return std::nullopt;
    }
    Int v = a_ + k_ * d_;
    ++k_;
    return Iv{v, v};
  }
  bool truncated() const override { return trunc_; }

 private:
  Int a_, d_, budget_;
  Int k_ = 0;
  bool trunc_ = false;
};

inline std::unique_ptr<IvStream> ProgressionImpl::stream(const Config& cfg) const {
  return std::make_unique<ProgressionStream>(a_, d_, cfg.generator_budget);
}

// ---------------------------------------------------------------------------
// Variant: interval union with a monotone generator k -> [l_k, r_k].
// Counting binary-searches the cached generator prefix; the lengths are
// derived from endpoints. Violations of l_k <= r_k < l_{k+1} abort.
// ---------------------------------------------------------------------------

class IntervalUnionImpl final : public NSetImpl {
 public:
  /// Generator is 1-based; nullopt = exhausted (bounded range or past the
  /// magnitude cap; `truncated` distinguishes the two).
  using Gen = std::function<std::optional<Iv>(const Int& k, const Config& cfg)>;

  IntervalUnionImpl(Gen gen, std::string dsl_text)
      : gen_(std::move(gen)), dsl_(std::move(dsl_text)) {}

  Int count(const Int& n, const Config& cfg) const override {
    std::lock_guard<std::mutex> lock(mu_);
    ensure_past(n, cfg);
    std::size_t idx = last_lo_le(n);
    if (idx == npos) return 0;
    Int before = idx == 0 ? Int(0) : cum_[idx - 1];
    return before + std::min(n, blocks_[idx].hi_or(n)) - blocks_[idx].lo + 1;
  }

  bool member(const Int& n, const Config& cfg) const override {
    std::lock_guard<std::mutex> lock(mu_);
    ensure_past(n, cfg);
    std::size_t idx = last_lo_le(n);
    return idx != npos && blocks_[idx].contains(n);
  }

  std::optional<Int> next_member(const Int& from, const Config& cfg) const override {
    std::lock_guard<std::mutex> lock(mu_);
    ensure_past(from, cfg);
    for (std::size_t i = first_hi_ge(from); i < blocks_.size(); ++i) {
      if (blocks_[i].lo >= from) return blocks_[i].lo;
      if (blocks_[i].contains(from)) return from;
    }
    return std::nullopt;
  }

  std::unique_ptr<IvStream> stream(const Config& cfg) const override;
  const std::string& dsl() const override { return dsl_; }

  /// k-th cached block (1-based); nullopt when exhausted.
  std::optional<Iv> block(std::size_t k, const Config& cfg) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (blocks_.size() < k && !done_) pull(cfg);
    if (blocks_.size() < k) return std::nullopt;
    return blocks_[k - 1];
  }
  bool cap_truncated() const {
    std::lock_guard<std::mutex> lock(mu_);
    return trunc_;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void pull(const Config& cfg) const {
    if (done_) return;
    Int k = Int(blocks_.size()) + 1;
    if (k > cfg.generator_budget) {
      done_ = true;
      trunc_ = true;
      return;
    }
    auto iv = gen_(k, cfg);
    if (!iv) {
      done_ = true;
      return;
    }
    if (iv->bounded() && iv->lo > *iv->hi)
      throw StructureError("interval generator: l_k > r_k at k=" + k.str() + " in " + dsl_);
    if (!blocks_.empty()) {
      const Iv& prev = blocks_.back();
      if (!prev.bounded() || iv->lo <= *prev.hi)
        throw StructureError("interval generator: not strictly increasing at k=" + k.str() +
                             " in " + dsl_);
    }
    if (!iv->bounded()) done_ = true;  // an unbounded block must be the last
    blocks_.push_back(*iv);
    Int len = iv->bounded() ? *iv->hi - iv->lo + 1 : Int(0);
    cum_.push_back((cum_.empty() ? Int(0) : cum_.back()) + len);
  }

  void ensure_past(const Int& n, const Config& cfg) const {
    while (!done_ && (blocks_.empty() || blocks_.back().lo <= n)) pull(cfg);
  }

  // largest index with blocks_[i].lo <= n
  std::size_t last_lo_le(const Int& n) const {
    std::size_t lo = 0, hi = blocks_.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (blocks_[mid].lo <= n) lo = mid + 1; else hi = mid;
    }
    return lo == 0 ? npos : lo - 1;
  }
  // smallest index with hi >= from (unbounded counts as infinite)
  std::size_t first_hi_ge(const Int& from) const {
    std::size_t lo = 0, hi = blocks_.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (!blocks_[mid].bounded() || *blocks_[mid].hi >= from) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  Gen gen_;
  std::string dsl_;
  mutable std::mutex mu_;
  mutable std::vector<Iv> blocks_;
  mutable std::vector<Int> cum_;
  mutable bool done_ = false;
  mutable bool trunc_ = false;
};

class IntervalUnionStream final : public IvStream {
 public:
  IntervalUnionStream(const IntervalUnionImpl* impl, const Config& cfg) : impl_(impl), cfg_(cfg) {}
  std::optional<Iv> next() override {
    auto b = impl_->block(++k_, cfg_);
    if (!b) trunc_ = impl_->cap_truncated();
    return b;
  }
  bool truncated() const override { return trunc_; }

 private:
  const IntervalUnionImpl* impl_;
  Config cfg_;
  std::size_t k_ = 0;
  bool trunc_ = false;
};

inline std::unique_ptr<IvStream> IntervalUnionImpl::stream(const Config& cfg) const {
  return std::make_unique<IntervalUnionStream>(this, cfg);
}

// ---------------------------------------------------------------------------
// Variant: shift (A - i) intersect N.
// ---------------------------------------------------------------------------

class ShiftImpl final : public NSetImpl {
 public:
  ShiftImpl(std::shared_ptr<const NSetImpl> base, Int i)
      : base_(std::move(base)), i_(std::move(i)) {
    if (i_ < 0) throw DomainError("shift: offset must be >= 0");
    dsl_ = "shift(" + base_->dsl() + "," + i_.str() + ")";
  }

  Int count(const Int& n, const Config& cfg) const override {
    return base_->count(n + i_, cfg) - base_->count(i_, cfg);
  }
  bool member(const Int& n, const Config& cfg) const override {
    return base_->member(n + i_, cfg);
  }
  std::optional<Int> next_member(const Int& from, const Config& cfg) const override {
    auto m = base_->next_member(from + i_, cfg);
    if (!m) return std::nullopt;
    return *m - i_;
  }
  std::unique_ptr<IvStream> stream(const Config& cfg) const override;
  const std::string& dsl() const override { return dsl_; }

 private:
  std::shared_ptr<const NSetImpl> base_;
  Int i_;
  std::string dsl_;
};

class ShiftStream final : public IvStream {
 public:
  ShiftStream(std::unique_ptr<IvStream> base, Int i) : base_(std::move(base)), i_(std::move(i)) {}
  std::optional<Iv> next() override {
    while (auto iv = base_->next()) {
      if (iv->bounded() && *iv->hi <= i_) continue;  // clipped away entirely
      Int lo = std::max(Int(1), Int(iv->lo - i_));
      if (!iv->bounded()) return Iv{lo, std::nullopt};
      return Iv{lo, Int(*iv->hi - i_)};
    }
    return std::nullopt;
  }
  bool truncated() const override { return base_->truncated(); }

 private:
  std::unique_ptr<IvStream> base_;
  Int i_;
};

inline std::unique_ptr<IvStream> ShiftImpl::stream(const Config& cfg) const {
  return std::make_unique<ShiftStream>(base_->stream(cfg), i_);
}

// ---------------------------------------------------------------------------
// Merge streams for union / intersection / complement.
// ---------------------------------------------------------------------------

class MergeUnionStream final : public IvStream {
 public:
  MergeUnionStream(std::unique_ptr<IvStream> a, std::unique_ptr<IvStream> b)
      : a_(std::move(a)), b_(std::move(b)) {}

  std::optional<Iv> next() override {
    std::optional<Iv> cur;
    while (true) {
      fill();
      std::optional<Iv>* pick = nullptr;
      if (pa_ && pb_) pick = pa_->lo <= pb_->lo ? &pa_ : &pb_;
      else if (pa_) pick = &pa_;
      else if (pb_) pick = &pb_;
      if (!pick) return cur;
      if (!cur) {
        cur = **pick;
        pick->reset();
        if (!cur->bounded()) return cur;
        continue;
      }
      // merge overlap/adjacency
      if ((*pick)->lo <= *cur->hi + 1) {
        if (!(*pick)->bounded()) {
          cur->hi = std::nullopt;
          pick->reset();
          return cur;
        }
        cur->hi = std::max(*cur->hi, *(*pick)->hi);
        pick->reset();
        continue;
      }
      return cur;  // gap: emit, keep the peeked interval for the next call
    }
  }
  bool truncated() const override { return a_->truncated() || b_->truncated(); }

 private:
  void fill() {
    if (!pa_ && !ea_) {
      pa_ = a_->next();
      if (!pa_) ea_ = true;
    }
    if (!pb_ && !eb_) {
      pb_ = b_->next();
      if (!pb_) eb_ = true;
    }
  }
  std::unique_ptr<IvStream> a_, b_;
  std::optional<Iv> pa_, pb_;
  bool ea_ = false, eb_ = false;
};

class MergeIntersectStream final : public IvStream {
 public:
  MergeIntersectStream(std::unique_ptr<IvStream> a, std::unique_ptr<IvStream> b)
      : a_(std::move(a)), b_(std::move(b)) {}

  std::optional<Iv> next() override {
    if (!pa_) pa_ = a_->next();
    if (!pb_) pb_ = b_->next();
    while (pa_ && pb_) {
      Int lo = std::max(pa_->lo, pb_->lo);
      bool a_inf = !pa_->bounded(), b_inf = !pb_->bounded();
      std::optional<Int> hi;
      if (a_inf && b_inf) hi = std::nullopt;
      else if (a_inf) hi = pb_->hi;
      else if (b_inf) hi = pa_->hi;
      else hi = std::min(*pa_->hi, *pb_->hi);
      // advance the stream whose interval ends first
      bool advance_a = !a_inf && (b_inf || *pa_->hi <= *pb_->hi);
      if (hi && lo <= *hi) {
        Iv out{lo, hi};
        if (advance_a) pa_ = a_->next(); else pb_ = b_->next();
        return out;
      }
      if (!hi) {
        Iv out{lo, hi};
        pa_.reset();
        pb_.reset();
        return out;
      }
      if (advance_a) pa_ = a_->next(); else pb_ = b_->next();
    }
    return std::nullopt;
  }
  bool truncated() const override { return a_->truncated() || b_->truncated(); }

 private:
  std::unique_ptr<IvStream> a_, b_;
  std::optional<Iv> pa_, pb_;
};

class GapStream final : public IvStream {
 public:
  GapStream(std::unique_ptr<IvStream> base) : base_(std::move(base)) {}

  std::optional<Iv> next() override {
    while (true) {
      if (done_) return std::nullopt;
      auto iv = base_->next();
      if (!iv) {
        done_ = true;
        if (base_->truncated()) {
          trunc_ = true;
          return std::nullopt;  // unknown territory beyond the cap
        }
        return Iv{pos_, std::nullopt};  // cofinite tail
      }
      std::optional<Iv> out;
      if (iv->lo > pos_) out = Iv{pos_, Int(iv->lo - 1)};
      if (!iv->bounded()) {
        done_ = true;
        return out ? out : std::nullopt;
      }
      pos_ = *iv->hi + 1;
      if (out) return out;
    }
  }
  bool truncated() const override { return trunc_; }

 private:
  std::unique_ptr<IvStream> base_;
  Int pos_ = 1;
  bool done_ = false;
  bool trunc_ = false;
};

/// Count by walking a stream; budget-guarded number of pulls. A truncated
/// stream that ends before n makes the count unknowable: error, never guess.
inline Int count_via_stream(IvStream& s, const Int& n, const Config& cfg) {
  Int total = 0;
  Int steps = 0;
  while (true) {
    auto iv = s.next();
    if (!iv) {
      if (s.truncated()) throw BudgetError("prefix count: stream truncated before n");
      return total;
    }
    if (++steps > cfg.generator_budget) throw BudgetError("prefix count exceeded stream budget");
    if (iv->lo > n) return total;
    total += std::min(n, iv->hi_or(n)) - iv->lo + 1;
    if (!iv->bounded() || *iv->hi >= n) return total;
  }
}

class UnionImpl final : public NSetImpl {
 public:
  UnionImpl(std::shared_ptr<const NSetImpl> a, std::shared_ptr<const NSetImpl> b)
      : a_(std::move(a)), b_(std::move(b)), dsl_("union(" + a_->dsl() + "," + b_->dsl() + ")") {}

  Int count(const Int& n, const Config& cfg) const override {
    auto s = stream(cfg);
    return count_via_stream(*s, n, cfg);
  }
  bool member(const Int& n, const Config& cfg) const override {
    return a_->member(n, cfg) || b_->member(n, cfg);
  }
  std::optional<Int> next_member(const Int& from, const Config& cfg) const override {
    auto ma = a_->next_member(from, cfg);
    auto mb = b_->next_member(from, cfg);
    if (ma && mb) return std::min(*ma, *mb);
    return ma ? ma : mb;
  }
  std::unique_ptr<IvStream> stream(const Config& cfg) const override {
    return std::make_unique<MergeUnionStream>(a_->stream(cfg), b_->stream(cfg));
  }
  const std::string& dsl() const override { return dsl_; }

 private:
  std::shared_ptr<const NSetImpl> a_, b_;
  std::string dsl_;
};

class IntersectImpl final : public NSetImpl {
 public:
  IntersectImpl(std::shared_ptr<const NSetImpl> a, std::shared_ptr<const NSetImpl> b)
      : a_(std::move(a)), b_(std::move(b)),
        dsl_("intersect(" + a_->dsl() + "," + b_->dsl() + ")") {}

  Int count(const Int& n, const Config& cfg) const override {
    auto s = stream(cfg);
    return count_via_stream(*s, n, cfg);
  }
  bool member(const Int& n, const Config& cfg) const override {
    return a_->member(n, cfg) && b_->member(n, cfg);
  }
  std::optional<Int> next_member(const Int& from, const Config& cfg) const override {
    Int budget = cfg.generator_budget;
    Int m = from;
    for (Int steps = 0; steps < budget; ++steps) {
      auto ma = a_->next_member(m, cfg);
      if (!ma) return std::nullopt;
      if (b_->member(*ma, cfg)) return *ma;
      auto mb = b_->next_member(*ma + 1, cfg);
      if (!mb) return std::nullopt;
      if (a_->member(*mb, cfg)) return *mb;
      m = *mb + 1;
    }
    throw BudgetError("intersection next_member exceeded budget");
  }
  std::unique_ptr<IvStream> stream(const Config& cfg) const override {
    return std::make_unique<MergeIntersectStream>(a_->stream(cfg), b_->stream(cfg));
  }
  const std::string& dsl() const override { return dsl_; }

 private:
  std::shared_ptr<const NSetImpl> a_, b_;
  std::string dsl_;
};

class ComplementImpl final : public NSetImpl {
 public:
  explicit ComplementImpl(std::shared_ptr<const NSetImpl> base)
      : base_(std::move(base)), dsl_("complement(" + base_->dsl() + ")") {}

  Int count(const Int& n, const Config& cfg) const override {
    return n - base_->count(n, cfg);
  }
  bool member(const Int& n, const Config& cfg) const override {
    return !base_->member(n, cfg);
  }
  std::optional<Int> next_member(const Int& from, const Config& cfg) const override {
    auto s = stream(cfg);
    Int steps = 0;
    while (auto iv = s->next()) {
      if (++steps > cfg.generator_budget) throw BudgetError("complement scan exceeded budget");
      if (!iv->bounded() || *iv->hi >= from) return std::max(iv->lo, from);
    }
    return std::nullopt;
  }
  std::unique_ptr<IvStream> stream(const Config& cfg) const override {
    return std::make_unique<GapStream>(base_->stream(cfg));
  }
  const std::string& dsl() const override { return dsl_; }

 private:
  std::shared_ptr<const NSetImpl> base_;
  std::string dsl_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories.
// ---------------------------------------------------------------------------

inline NSet nset_finite(std::vector<Int> xs) {
  return NSet(std::make_shared<detail::FiniteImpl>(std::move(xs)));
}

inline NSet nset_empty() { return nset_finite({}); }

inline NSet nset_progression(Int start, Int step) {
  return NSet(std::make_shared<detail::ProgressionImpl>(std::move(start), std::move(step)));
}

/// Interval union from a custom generator (constructions, families).
inline NSet nset_interval_union_fn(detail::IntervalUnionImpl::Gen gen, std::string dsl_text) {
  return NSet(std::make_shared<detail::IntervalUnionImpl>(std::move(gen), std::move(dsl_text)));
}

/// Interval union from endpoint expressions over k (1-based), optionally
/// bounded to k <= kmax. Endpoints past the magnitude cap end the stream.
inline NSet nset_interval_union(const ExprPtr& lo, const ExprPtr& hi,
                                std::optional<Int> kmax = std::nullopt,
                                std::optional<std::string> dsl_text = std::nullopt) {
  std::string text = dsl_text ? *dsl_text
                              : "union k in 1.." + (kmax ? kmax->str() : "") + " : [" +
                                    expr_str(lo, "k") + "," + expr_str(hi, "k") + "]";
  auto gen = [lo, hi, kmax](const Int& k, const Config& cfg) -> std::optional<Iv> {
    if (kmax && k > *kmax) return std::nullopt;
    IntVal l = eval_int(lo, k, cfg);
    if (!l.finite()) return std::nullopt;  // beyond the cap: stream ends
    IntVal h = eval_int(hi, k, cfg);
    if (!h.finite()) return Iv{l.v, std::nullopt};
    return Iv{l.v, h.v};
  };
  return nset_interval_union_fn(std::move(gen), std::move(text));
}

/// Explicit sorted disjoint interval list (constructed sets).
inline NSet nset_intervals(std::vector<std::pair<Int, Int>> ivs) {
  std::sort(ivs.begin(), ivs.end());
  std::string text = "intervals {";
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    if (i) text += ",";
    text += "[" + ivs[i].first.str() + "," + ivs[i].second.str() + "]";
  }
  text += "}";
  auto gen = [ivs](const Int& k, const Config&) -> std::optional<Iv> {
    std::size_t i = k.convert_to<std::size_t>() - 1;
    if (i >= ivs.size()) return std::nullopt;
    return Iv{ivs[i].first, ivs[i].second};
  };
  return nset_interval_union_fn(std::move(gen), std::move(text));
}

inline NSet nset_shift(const NSet& base, Int i) {
  if (i == 0) return base;
  return NSet(std::make_shared<detail::ShiftImpl>(base.impl_ptr(), std::move(i)));
}

inline NSet nset_union(const NSet& a, const NSet& b) {
  return NSet(std::make_shared<detail::UnionImpl>(a.impl_ptr(), b.impl_ptr()));
}

inline NSet nset_intersect(const NSet& a, const NSet& b) {
  return NSet(std::make_shared<detail::IntersectImpl>(a.impl_ptr(), b.impl_ptr()));
}

inline NSet nset_complement(const NSet& base) {
  return NSet(std::make_shared<detail::ComplementImpl>(base.impl_ptr()));
}

/// Membership equality on a probe prefix [1, n] (test / round-trip helper).
inline bool sets_equal_on(const NSet& a, const NSet& b, const Int& n,
                          const Config& cfg = default_config()) {
  for (Int i = 1; i <= n; ++i)
    if (a.member(i, cfg) != b.member(i, cfg)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// IntervalFamily: a member of the family of supports built from a strictly
// increasing sequence (n_r): blocks B_r = [n_{2r-1}, n_{2r}] and the gaps
// between them partition [n_1, infinity) on every inspected prefix.
// ---------------------------------------------------------------------------

class IntervalFamily {
 public:
  /// n_r for 1-based r; nullopt once past the magnitude cap.
  using EndpointFn = std::function<std::optional<Int>(const Int& r, const Config&)>;

  IntervalFamily(EndpointFn ep, std::string r_expr_text)
      : ep_(std::move(ep)), text_(std::move(r_expr_text)) {}

  /// Family whose endpoint sequence is an integer expression over r.
  static IntervalFamily from_expr(const ExprPtr& e) {
    auto ep = [e](const Int& r, const Config& cfg) -> std::optional<Int> {
      IntVal v = eval_int(e, r, cfg);
      if (!v.finite()) return std::nullopt;
      return v.v;
    };
    IntervalFamily fam(std::move(ep), expr_str(e, "r"));
    fam.expr_ = e;
    return fam;
  }

  static IntervalFamily from_elements(std::vector<Int> xs) {
    std::string text = "seq {";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) text += ",";
      text += xs[i].str();
    }
    text += "}";
    auto elems = std::make_shared<const std::vector<Int>>(std::move(xs));
    auto ep = [elems](const Int& r, const Config&) -> std::optional<Int> {
      std::size_t i = r.convert_to<std::size_t>();
      if (i == 0 || i > elems->size()) return std::nullopt;
      return (*elems)[i - 1];
    };
    IntervalFamily fam(std::move(ep), std::move(text));
    fam.elems_ = elems;
    return fam;
  }

  std::optional<Int> endpoint(const Int& r, const Config& cfg = default_config()) const {
    if (r < 1) throw DomainError("IntervalFamily: r must be >= 1");
    return ep_(r, cfg);
  }

  const std::string& expr_text() const { return text_; }

  /// Union of the blocks B_r.
  NSet blocks() const {
    auto ep = ep_;
    auto gen = [ep](const Int& k, const Config& cfg) -> std::optional<Iv> {
      auto lo = ep(2 * k - 1, cfg);
      if (!lo) return std::nullopt;
      auto hi = ep(2 * k, cfg);
      if (!hi) return Iv{*lo, std::nullopt};
      return Iv{*lo, *hi};
    };
    std::string text;
    if (expr_)
      text = "union k in 1.. : [" + expr_str(expr_, "(2*k-1)") + "," + expr_str(expr_, "(2*k)") + "]";
    else
      text = materialized_text(1, 0);
    return nset_interval_union_fn(std::move(gen), std::move(text));
  }

  /// Union of the gaps G_r = [n_{2r}+1, n_{2r+1}-1].
  NSet gaps() const {
    auto ep = ep_;
    auto gen = [ep](const Int& k, const Config& cfg) -> std::optional<Iv> {
      auto lo = ep(2 * k, cfg);
      if (!lo) return std::nullopt;
      auto hi = ep(2 * k + 1, cfg);
      if (!hi) return Iv{Int(*lo + 1), std::nullopt};
      if (*hi - 1 < *lo + 1)
        throw StructureError("IntervalFamily: empty gap at r=" + k.str());
      return Iv{Int(*lo + 1), Int(*hi - 1)};
    };
    std::string text;
    if (expr_)
      text = "union k in 1.. : [" + expr_str(expr_, "(2*k)") + "+1," +
             expr_str(expr_, "(2*k+1)") + "-1]";
    else
      text = materialized_text(2, 1);
    return nset_interval_union_fn(std::move(gen), std::move(text));
  }

  /// The underlying endpoint set {n_r}.
  NSet endpoints() const {
    auto ep = ep_;
    auto gen = [ep](const Int& k, const Config& cfg) -> std::optional<Iv> {
      auto v = ep(k, cfg);
      if (!v) return std::nullopt;
      return Iv{*v, *v};
    };
    std::string text;
    if (expr_)
      text = "union k in 1.. : [" + expr_str(expr_, "k") + "," + expr_str(expr_, "k") + "]";
    else
      text = materialized_text(0, 0);
    return nset_interval_union_fn(std::move(gen), std::move(text));
  }

  /// Checks strict monotonicity of (n_r) for r <= R; this implies the
  /// block/gap partition property on the inspected prefix.
  void validate_prefix(const Int& R, const Config& cfg = default_config()) const {
    std::optional<Int> prev;
    for (Int r = 1; r <= R; ++r) {
      auto v = ep_(r, cfg);
      if (!v) return;  // past the cap: nothing more to check
      if (prev && *v <= *prev)
        throw StructureError("IntervalFamily: endpoints not strictly increasing at r=" + r.str());
      prev = *v;
    }
  }

 private:
  /// Explicit interval-list text for element-backed families.
  /// mode 0: endpoints as singletons; 1: blocks [n_{2r-1}, n_{2r}];
  /// 2: gaps (with offset digits applied).
  std::string materialized_text(int mode, int gap) const {
    if (!elems_) throw CapabilityError("IntervalFamily: no materializable endpoint list");
    const auto& xs = *elems_;
    std::string text = "intervals {";
    bool first = true;
    auto emit = [&](const Int& lo, const Int& hi) {
      if (hi < lo) throw StructureError("IntervalFamily: empty interval in materialization");
      if (!first) text += ",";
      text += "[" + lo.str() + "," + hi.str() + "]";
      first = false;
    };
    if (mode == 0) {
      for (const auto& v : xs) emit(v, v);
    } else if (mode == 1) {
      for (std::size_t r = 1; 2 * r <= xs.size(); ++r) emit(xs[2 * r - 2], xs[2 * r - 1]);
    } else {
      for (std::size_t r = 1; 2 * r + 1 <= xs.size(); ++r)
        emit(Int(xs[2 * r - 1] + 1), Int(xs[2 * r] - 1));
    }
    (void)gap;
    return text + "}";
  }

  EndpointFn ep_;
  std::string text_;
  ExprPtr expr_;
  std::shared_ptr<const std::vector<Int>> elems_;
};

}  // namespace charsub
