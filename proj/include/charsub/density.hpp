#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charsub/dsl.hpp"
#include "charsub/funcs.hpp"
#include "charsub/nset.hpp"

namespace charsub {

// ---------------------------------------------------------------------------
// Certified evaluation of F(n) = f(g(n)) and exact scaled comparisons
// F(n) vs c * F(m). The exact paths are what pin block boundaries like
// 2^{2^k}-1 without precision games.
// ---------------------------------------------------------------------------

inline EvalFn fg_at(const ModulusFn& f, const WeightFn& g, const Int& n, const Config& cfg) {
  ModulusFn fc = f;
  WeightFn gc = g;
  Int m = n;
  return [fc, gc, m, cfg](unsigned prec) -> std::optional<Ival> {
    auto gv = gc.eval(m, prec, cfg);
    if (!gv) return std::nullopt;
    if (gv->lo < 0) return std::nullopt;
    return fc.eval(*gv, prec, cfg);
  };
}

inline EvalFn scaled(const Rat& c, const EvalFn& base) {
  return [c, base](unsigned prec) -> std::optional<Ival> {
    auto v = base(prec);
    if (!v) return std::nullopt;
    return Ival(c, c) * *v;
  };
}

inline Rat weight_exact(const WeightFn& g, const Int& n, const Config& cfg) {
  auto v = g.eval(n, cfg.prec_start, cfg);
  if (!v || !v->exact())
    throw Error("weight '" + g.dsl() + "' expected to be exact-valued at n=" + n.str());
  return v->lo;
}

/// True when f(g(n)) vs c*f(g(m)) comparisons resolve through an exact
/// algebraic route (so minimality scans cannot stall on equality cases).
inline bool fg_exactly_comparable(const ModulusFn& f, const WeightFn& g) {
  using K = FnShape::Kind;
  if (g.exact_valued() && f.shape().kind != K::other) return true;
  if (f.shape().kind == K::identity && g.shape().kind != K::other) return true;
  if (f.shape().kind == K::powrat && g.shape().kind == K::powrat) return true;
  return false;
}

/// Decides f(g(n)) vs c * f(g(m)); exact algebraic route when the shapes
/// allow it, certified interval refinement otherwise.
inline Ord order_fg_scaled(const ModulusFn& f, const WeightFn& g, const Int& n, const Rat& c,
                           const Int& m, const Config& cfg) {
  using K = FnShape::Kind;
  if (g.exact_valued() && f.shape().kind != K::other) {
    Rat x = weight_exact(g, n, cfg), y = weight_exact(g, m, cfg);
    auto o = shape_scaled_order(f.shape(), x, c, y);
    if (o) return *o;
  }
  if (f.shape().kind == K::identity && g.shape().kind != K::other) {
    auto o = shape_scaled_order(g.shape(), Rat(n), c, Rat(m));
    if (o) return *o;
  }
  if (f.shape().kind == K::powrat && g.shape().kind == K::powrat) {
    FnShape comp = FnShape::powrat(Int(f.shape().p * g.shape().p), Int(f.shape().q * g.shape().q));
    auto o = shape_scaled_order(comp, Rat(n), c, Rat(m));
    if (o) return *o;
  }
  return certified_order(fg_at(f, g, n, cfg), scaled(c, fg_at(f, g, m, cfg)), cfg,
                         "f(g(" + n.str() + ")) vs " + rat_str(c) + "*f(g(" + m.str() + "))");
}

/// Decides f(x) vs c * f(y) for exact rational arguments.
inline Ord order_f_scaled(const ModulusFn& f, const Rat& x, const Rat& c, const Rat& y,
                          const Config& cfg) {
  auto o = shape_scaled_order(f.shape(), x, c, y);
  if (o) return *o;
  return certified_order(f.at(x, cfg), scaled(c, f.at(y, cfg)), cfg,
                         "f(" + rat_str(x) + ") vs scaled f(" + rat_str(y) + ")");
}

// ---------------------------------------------------------------------------
// Density trajectories: finite-checkpoint evidence for d^f_g.
// ---------------------------------------------------------------------------

struct DensityTrajectory {
  NSet set;
  ModulusFn f;
  WeightFn g;
  std::vector<Int> checkpoints;
  std::vector<Int> counts;
  std::vector<Ival> values;  // f(|A cap [1,n]|) / f(g(n))
  std::vector<Ival> f_counts;
  std::vector<Ival> f_gs;

  /// Re-evaluator for checkpoint i (used by verdicts to refine).
  EvalFn value_fn(std::size_t i, const Config& cfg) const {
    ModulusFn fc = f;
    WeightFn gc = g;
    Int n = checkpoints[i];
    Int cnt = counts[i];
    return [fc, gc, n, cnt, cfg](unsigned prec) -> std::optional<Ival> {
      auto fc_v = fc.eval(Rat(cnt), prec, cfg);
      auto den = fg_at(fc, gc, n, cfg)(prec);
      if (!fc_v || !den) return std::nullopt;
      return try_div(*fc_v, *den);
    };
  }
};

inline DensityTrajectory trajectory(const NSet& A, const ModulusFn& f, const WeightFn& g,
                                    std::vector<Int> checkpoints,
                                    const Config& cfg = default_config()) {
  if (checkpoints.empty()) throw DomainError("trajectory: no checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw DomainError("trajectory: checkpoints must be increasing and >= 1");
  }
  DensityTrajectory t{A, f, g, std::move(checkpoints), {}, {}, {}, {}};
  for (const Int& n : t.checkpoints) {
    Int cnt = A.count(n, cfg);
    t.counts.push_back(cnt);
    Ival fc, fgv, ratio;
    for (unsigned prec = cfg.prec_start;; prec *= 2) {
      auto a = f.eval(Rat(cnt), prec, cfg);
      auto b = fg_at(f, g, n, cfg)(prec);
      if (a && b) {
        auto r = try_div(*a, *b);
        if (r) {
          fc = *a;
          fgv = *b;
          ratio = *r;
          break;
        }
      }
      if (prec >= cfg.prec_cap)
        throw PrecisionError("trajectory value undecidable at n=" + n.str());
    }
    t.f_counts.push_back(fc);
    t.f_gs.push_back(fgv);
    t.values.push_back(ratio);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Three-valued verdicts over a final checkpoint window. Evidence, never proof.
// ---------------------------------------------------------------------------

struct DensityVerdict {
  enum class Kind { null_at_scale, positive_at_scale, indeterminate } kind;
  std::size_t window_begin;
  Rat tol, threshold;
  std::string note;

  std::string str() const {
    switch (kind) {
      case Kind::null_at_scale: return "null-at-scale";
      case Kind::positive_at_scale: return "positive-at-scale";
      case Kind::indeterminate: return "indeterminate";
    }
    return "?";
  }
};

inline DensityVerdict classify(const DensityTrajectory& t, const Config& cfg = default_config()) {
  using K = DensityVerdict::Kind;
  std::size_t len = t.checkpoints.size();
  std::size_t wlen = std::max<std::size_t>(1, (len * cfg.window_num + cfg.window_den - 1) / cfg.window_den);
  std::size_t begin = len - wlen;
  DensityVerdict v{K::indeterminate, begin, cfg.null_tol, cfg.pos_threshold, ""};
  try {
    bool all_null = true;
    for (std::size_t i = begin; i < len && all_null; ++i)
      all_null = certified_order(t.value_fn(i, cfg), cfg.null_tol, cfg, "verdict null") == Ord::lt;
    if (all_null) {
      v.kind = K::null_at_scale;
      return v;
    }
    bool all_pos = true;
    for (std::size_t i = begin; i < len && all_pos; ++i)
      all_pos = certified_order(t.value_fn(i, cfg), cfg.pos_threshold, cfg, "verdict pos") == Ord::gt;
    if (all_pos) {
      v.kind = K::positive_at_scale;
      return v;
    }
  } catch (const PrecisionError& e) {
    v.note = e.what();
  }
  v.kind = K::indeterminate;
  return v;
}

// ---------------------------------------------------------------------------
// Block decomposition: n_0 = 1, n_{k+1} = min{ n : f(g(n)) >= 2 f(g(n_k)) }.
// Minimal elements found by exponential search + bisection over the
// non-decreasing n -> f(g(n)) (envelope applied first when g is not).
// ---------------------------------------------------------------------------

struct BlockDecomposition {
  ModulusFn f;
  WeightFn g;  // the non-decreasing weight actually scanned
  std::vector<Int> starts;  // n_0 < n_1 < ... (starts[k] = n_k)
  bool capped = false;      // ran into the magnitude cap before K blocks

  std::size_t blocks() const { return starts.empty() ? 0 : starts.size() - 1; }
};

inline BlockDecomposition block_decomposition(const ModulusFn& f, const WeightFn& gin, Int K,
                                              const Config& cfg = default_config()) {
  if (K < 1) throw DomainError("block_decomposition: K must be >= 1");
  if (!f.unbounded())
    throw CapabilityError("block_decomposition requires an unbounded modulus");
  WeightFn g = gin.nondecreasing() ? gin : monotone_envelope(gin, cfg);
  BlockDecomposition out{f, g, {Int(1)}, false};
  for (Int k = 0; k < K; ++k) {
    const Int base = out.starts.back();
    auto pred = [&](const Int& n) { return order_fg_scaled(f, g, n, Rat(2), base, cfg) != Ord::lt; };
    Int lo = base, hi = base + 1;
    bool found = false;
    while (true) {
      if (bit_length(hi) > cfg.magnitude_cap_bits) break;
      if (pred(hi)) {
        found = true;
        break;
      }
      lo = hi;
      hi <<= 1;
    }
    if (!found) {
      out.capped = true;
      break;
    }
    while (lo + 1 < hi) {
      Int mid = (lo + hi) >> 1;
      if (mid <= base) mid = base + 1;
      if (pred(mid)) hi = mid; else lo = mid;
    }
    out.starts.push_back(hi);
  }
  return out;
}

/// mu_k(A) = f(|A cap [n_k, n_{k+1})|) / f(g(n_k)).
inline Ival block_measure(const NSet& A, const BlockDecomposition& D, std::size_t k,
                          const Config& cfg = default_config()) {
  if (k + 1 >= D.starts.size()) throw DomainError("block_measure: block index out of range");
  Int cnt = A.count(D.starts[k + 1] - 1, cfg) - A.count(D.starts[k] - 1, cfg);
  for (unsigned prec = cfg.prec_start;; prec *= 2) {
    auto a = D.f.eval(Rat(cnt), prec, cfg);
    auto b = fg_at(D.f, D.g, D.starts[k], cfg)(prec);
    if (a && b) {
      auto r = try_div(*a, *b);
      if (r) return *r;
    }
    if (prec >= cfg.prec_cap) throw PrecisionError("block_measure undecidable");
  }
}

/// sup_i mu_k({i}) = f(1)/f(g(n_k)) for k = 0..blocks-1; tends to 0, which is
/// the tallness mechanism.
inline std::vector<Ival> tallness_evidence(const BlockDecomposition& D,
                                           const Config& cfg = default_config()) {
  std::vector<Ival> out;
  for (std::size_t k = 0; k < D.starts.size(); ++k) {
    for (unsigned prec = cfg.prec_start;; prec *= 2) {
      auto a = D.f.eval(Rat(1), prec, cfg);
      auto b = fg_at(D.f, D.g, D.starts[k], cfg)(prec);
      if (a && b) {
        auto r = try_div(*a, *b);
        if (r) {
          out.push_back(*r);
          break;
        }
      }
      if (prec >= cfg.prec_cap) throw PrecisionError("tallness value undecidable");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thinning an infinite set to a null subset: at most one element per block,
// so mu_k(B') <= f(1)/f(g(n_k)) -> 0.
// ---------------------------------------------------------------------------

struct ThinResult {
  NSet thinned;
  bool exhausted = false;    // B ran out within the inspected blocks
  std::size_t blocks_hit = 0;
};

inline ThinResult thin_to_null(const NSet& B, const BlockDecomposition& D,
                               const Config& cfg = default_config()) {
  std::vector<Int> picks;
  bool exhausted = false;
  std::size_t hit = 0;
  for (std::size_t k = 0; k + 1 < D.starts.size(); ++k) {
    auto m = B.next_member(D.starts[k], cfg);
    if (!m) {
      exhausted = true;
      break;
    }
    if (*m < D.starts[k + 1]) {
      picks.push_back(*m);
      ++hit;
    }
  }
  if (!picks.empty()) {
    // also confirm B still has an element at or past the last block start
    if (!B.next_member(D.starts.back(), cfg)) exhausted = true;
  }
  return ThinResult{nset_finite(std::move(picks)), exhausted, hit};
}

// ---------------------------------------------------------------------------
// Two-modulus scale sequence: a_1 = 1 and a_{n+1} minimal with
// min{f1(r), f2(r)} > n * max{f1(a_n), f2(a_n)} and r > 2 a_n.
// ---------------------------------------------------------------------------

struct ScaleSeq {
  std::vector<Int> terms;  // a_1, a_2, ...
  bool capped = false;
};

namespace detail {

/// f(r) vs c*f(a): exact shape route when it is the same modulus on both
/// sides, certified otherwise.
inline Ord order_modulus_scaled(const ModulusFn& fr, const Rat& r, const Rat& c,
                                const ModulusFn& fa, const Rat& a, const Config& cfg) {
  if (fr.dsl() == fa.dsl()) {
    auto o = shape_scaled_order(fr.shape(), r, c, a);
    if (o) return *o;
  }
  return certified_order(fr.at(r, cfg), scaled(c, fa.at(a, cfg)), cfg,
                         fr.dsl() + "(" + rat_str(r) + ") vs scaled " + fa.dsl());
}

}  // namespace detail

inline ScaleSeq scale_sequence(const ModulusFn& f1, const ModulusFn& f2, Int K,
                               const Config& cfg = default_config()) {
  if (K < 1) throw DomainError("scale_sequence: K must be >= 1");
  if (!f1.unbounded() || !f2.unbounded())
    throw CapabilityError("scale_sequence requires unbounded moduli");
  ScaleSeq out;
  out.terms.push_back(1);
  for (Int n = 1; n < K; ++n) {
    const Int& a = out.terms.back();
    // which of f1(a), f2(a) dominates (ties are harmless)
    Ord dom = certified_order(f1.at(Rat(a), cfg), f2.at(Rat(a), cfg), cfg, "scale max");
    const ModulusFn& fdom = dom == Ord::lt ? f2 : f1;
    Rat c = Rat(n);
    auto pred = [&](const Int& r) {
      if (r <= 2 * a) return false;
      return detail::order_modulus_scaled(f1, Rat(r), c, fdom, Rat(a), cfg) == Ord::gt &&
             detail::order_modulus_scaled(f2, Rat(r), c, fdom, Rat(a), cfg) == Ord::gt;
    };
    Int lo = 2 * a, hi = 2 * a + 1;
    bool found = false;
    while (true) {
      if (bit_length(hi) > cfg.magnitude_cap_bits) break;
      if (pred(hi)) {
        found = true;
        break;
      }
      lo = hi;
      hi <<= 1;
    }
    if (!found) {
      out.capped = true;
      break;
    }
    while (lo + 1 < hi) {
      Int mid = (lo + hi) >> 1;
      if (pred(mid)) hi = mid; else lo = mid;
    }
    out.terms.push_back(hi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// The single-modulus construction separating Z(f) from Z_g(f): a_{n+1}
// minimal with f(a_{n+1}) > n f(a_n) and a_{n+1} > a_n; blocks b_k = a_{4k-2},
// c_k = a_{4k-1}, d_k = a_{4k}; g = d_k on (b_k, d_k], identity off blocks;
// A = union of (b_k, c_k].
// ---------------------------------------------------------------------------

struct Prop27 {
  std::vector<Int> a;  // a_1, a_2, ...
  std::vector<Int> b, c, d;
  WeightFn g;
  NSet A;
  DensityTrajectory under_fg;   // A under (f, g): expected null-at-scale
  DensityTrajectory under_fid;  // A under (f, id): expected bounded away
  bool capped = false;
  std::size_t blocks = 0;
};

inline std::vector<Int> growth_sequence(const ModulusFn& f, Int terms, bool& capped,
                                        const Config& cfg) {
  std::vector<Int> a{Int(1)};
  capped = false;
  for (Int n = 1; n < terms; ++n) {
    const Int& last = a.back();
    auto pred = [&](const Int& r) {
      if (r <= last) return false;
      return detail::order_modulus_scaled(f, Rat(r), Rat(n), f, Rat(last), cfg) == Ord::gt;
    };
    Int lo = last, hi = last + 1;
    bool found = false;
    while (true) {
      if (bit_length(hi) > cfg.magnitude_cap_bits) break;
      if (pred(hi)) {
        found = true;
        break;
      }
      lo = hi;
      hi <<= 1;
    }
    if (!found) {
      capped = true;
      break;
    }
    while (lo + 1 < hi) {
      Int mid = (lo + hi) >> 1;
      if (pred(mid)) hi = mid; else lo = mid;
    }
    a.push_back(hi);
  }
  return a;
}

inline Prop27 prop27_construction(const ModulusFn& f, Int K,
                                  const Config& cfg = default_config()) {
  if (K < 1) throw DomainError("prop27_construction: K must be >= 1");
  if (!f.unbounded()) throw CapabilityError("prop27_construction requires an unbounded modulus");
  Prop27 out;
  out.a = growth_sequence(f, Int(4 * K + 1), out.capped, cfg);
  std::size_t kmax = out.a.size() / 4;  // complete (b,c,d) triples
  if (kmax == 0)
    throw CapError("prop27_construction: magnitude cap leaves no complete block");
  out.blocks = kmax;
  std::vector<WeightBlock> gblocks;
  std::vector<std::pair<Int, Int>> aIvs;
  std::vector<Int> cps;
  for (std::size_t k = 1; k <= kmax; ++k) {
    Int bk = out.a[4 * k - 3];  // a_{4k-2}, 1-based -> index 4k-3
    Int ck = out.a[4 * k - 2];  // a_{4k-1}
    Int dk = out.a[4 * k - 1];  // a_{4k}
    out.b.push_back(bk);
    out.c.push_back(ck);
    out.d.push_back(dk);
    gblocks.push_back({bk, dk, dk});
    aIvs.emplace_back(bk + 1, ck);
    cps.push_back(bk);
    cps.push_back(ck);
    cps.push_back(dk);
  }
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (cps.front() < 1) throw Error("prop27: bad checkpoint");
  out.g = weight_blocks(std::move(gblocks));
  out.A = nset_intervals(std::move(aIvs));
  out.under_fg = trajectory(out.A, f, out.g, cps, cfg);
  out.under_fid = trajectory(out.A, f, weight_n(), cps, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// Antichain family over an index set P: g_P = d_{p_k} on (b_{p_k}, b_{p_k+1}],
// A_P = union (b_{p_k}, c'_{p_k}], B_P = union (c_{p_k+1}, b_{p_k+1}] with
// c_{p_k+1} = b_{p_k+1} - d_{p_k}.
// ---------------------------------------------------------------------------

struct AntichainFamily {
  WeightFn g_P;
  NSet A_P, B_P;
  DensityTrajectory AP_under_fg;    // A_P under (f1, g_P): null evidence
  DensityTrajectory AP_under_fid;   // A_P under (f2, id): bounded away
  DensityTrajectory BP_under_fid;   // B_P under (f2, id): null evidence
  DensityTrajectory BP_under_fg;    // B_P under (f1, g_P): value-1 checkpoints
  std::vector<Int> scale_terms;
  std::vector<Int> bp1;             // the b_{p_k+1} checkpoints (measure = 1 there)
};

inline AntichainFamily antichain_family(const ModulusFn& f1, const ModulusFn& f2,
                                        const std::vector<Int>& P,
                                        const Config& cfg = default_config()) {
  if (P.empty()) throw DomainError("antichain_family: P must be nonempty");
  for (std::size_t i = 0; i < P.size(); ++i)
    if (P[i] < 1 || (i > 0 && P[i] <= P[i - 1]))
      throw DomainError("antichain_family: P must be strictly increasing and positive");
  Int need = 4 * P.back() + 3;
  ScaleSeq s = scale_sequence(f1, f2, need, cfg);
  if (Int(s.terms.size()) < need)
    throw CapError("antichain_family: only " + std::to_string(s.terms.size()) +
                   " scale-sequence terms under the cap; need " + need.str());
  auto a = [&](const Int& i) { return s.terms[i.convert_to<std::size_t>() - 1]; };

  std::vector<WeightBlock> gblocks;
  std::vector<std::pair<Int, Int>> apIvs, bpIvs;
  std::vector<Int> cps_cprime, cps_b1, cps_c1;
  for (const Int& p : P) {
    Int bp = a(4 * p - 2);
    Int cp = a(4 * p - 1);     // c'_{p}
    Int dp = a(4 * p);
    Int bp1 = a(4 * p + 2);    // b_{p+1}
    Int cp1 = bp1 - dp;        // c_{p+1}
    gblocks.push_back({bp, bp1, dp});
    apIvs.emplace_back(bp + 1, cp);
    bpIvs.emplace_back(cp1 + 1, bp1);
    cps_cprime.push_back(cp);
    cps_b1.push_back(bp1);
    cps_c1.push_back(cp1);
  }
  AntichainFamily out;
  out.scale_terms = s.terms;
  out.bp1 = cps_b1;
  out.g_P = weight_blocks(std::move(gblocks));
  out.A_P = nset_intervals(std::move(apIvs));
  out.B_P = nset_intervals(std::move(bpIvs));

  auto merged = [](std::vector<Int> x, const std::vector<Int>& y) {
    x.insert(x.end(), y.begin(), y.end());
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
  };
  std::vector<Int> ap_cps = merged(cps_cprime, cps_b1);
  std::vector<Int> bp_cps = merged(cps_c1, cps_b1);
  out.AP_under_fg = trajectory(out.A_P, f1, out.g_P, ap_cps, cfg);
  out.AP_under_fid = trajectory(out.A_P, f2, weight_n(), cps_cprime, cfg);
  out.BP_under_fid = trajectory(out.B_P, f2, weight_n(), bp_cps, cfg);
  out.BP_under_fg = trajectory(out.B_P, f1, out.g_P, cps_b1, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// Geometric-mean weight: f(g3(n)) is the minimal modulus value at or above
// sqrt(f(g1(n)) * f(g2(n))); realized through minimal inversion of f.
// ---------------------------------------------------------------------------

inline Int invert_modulus_to(const ModulusFn& f, const EvalFn& target,
                             const Config& cfg = default_config()) {
  auto ge = [&](const Int& x) {
    return certified_order(f.at(Rat(x), cfg), target, cfg, "invert to target") != Ord::lt;
  };
  Int hi = 1;
  while (!ge(hi)) {
    hi <<= 1;
    if (bit_length(hi) > cfg.magnitude_cap_bits)
      throw CapabilityError("invert_modulus_to: target unreachable under the magnitude cap");
  }
  Int lo = hi >> 1;
  while (lo + 1 < hi) {
    Int mid = (lo + hi) >> 1;
    if (ge(mid)) hi = mid; else lo = mid;
  }
  // hi = 1 case: check whether 0 already reaches the target
  if (hi == 1 && ge(Int(0))) return 0;
  return hi;
}

inline WeightFn geometric_mean_weight(const ModulusFn& f, const WeightFn& g1, const WeightFn& g2,
                                      const Config& cfg = default_config()) {
  if (!f.unbounded()) throw CapabilityError("geometric_mean_weight requires an unbounded modulus");
  auto memo = std::make_shared<std::map<Int, Int>>();
  auto mu = std::make_shared<std::mutex>();
  ModulusFn fc = f;
  WeightFn g1c = g1, g2c = g2;
  WeightFn::Evaluator ev = [memo, mu, fc, g1c, g2c](const Int& n, unsigned,
                                                    const Config& c) -> std::optional<Ival> {
    {
      std::lock_guard<std::mutex> lock(*mu);
      auto it = memo->find(n);
      if (it != memo->end()) return Ival(Rat(it->second));
    }
    EvalFn target = [&fc, &g1c, &g2c, &n, &c](unsigned prec) -> std::optional<Ival> {
      auto u = fg_at(fc, g1c, n, c)(prec);
      auto v = fg_at(fc, g2c, n, c)(prec);
      if (!u || !v) return std::nullopt;
      Ival prod = *u * *v;
      if (prod.lo < 0) return std::nullopt;
      return sqrt_ival(prod, prec);
    };
    Int val = invert_modulus_to(fc, target, c);
    std::lock_guard<std::mutex> lock(*mu);
    memo->emplace(n, val);
    return Ival(Rat(val));
  };
  WeightFn::Witness w = monotone_search_witness(ev);
  WeightFn out("geomean(" + f.dsl() + ";" + g1.dsl() + ";" + g2.dsl() + ")", std::move(ev),
               std::move(w), true);
  out.with_exact_values();
  return out;
}

// ---------------------------------------------------------------------------
// The step weight g1(n) = k on [n_k, n_{k+1}) built from an infinite
// A = {n_1 < n_2 < ...}, with growth evidence f(n_k)/f(k) past a threshold.
// ---------------------------------------------------------------------------

struct Prop212 {
  WeightFn g1;
  std::vector<std::pair<Int, Ival>> growth;  // (k, f(n_k)/f(k))
  std::optional<Int> threshold_k;            // first sampled k with value > threshold
};

inline Int kth_member(const NSet& A, const Int& k, const Config& cfg = default_config()) {
  if (k < 1) throw DomainError("kth_member: k must be >= 1");
  auto st = A.stream(cfg);
  Int cum = 0, steps = 0;
  while (auto iv = st->next()) {
    if (++steps > cfg.generator_budget) throw BudgetError("kth_member exceeded stream budget");
    Int len = iv->bounded() ? Int(*iv->hi - iv->lo + 1) : Int(-1);
    if (len < 0 || cum + len >= k) return Int(iv->lo + (k - cum) - 1);
    cum += len;
  }
  throw StructureError("kth_member: set has fewer than " + k.str() + " members within budget");
}

inline Prop212 prop212_weight(const ModulusFn& f, const NSet& A, const Rat& threshold = Rat(1000),
                              const Config& cfg = default_config()) {
  // A must be infinite at inspection scale; two members is the cheap sanity gate
  kth_member(A, 2, cfg);
  Prop212 out;
  out.g1 = weight_count_of(A);
  std::vector<Int> ks;
  for (Int k = 1; k <= 24; ++k) ks.push_back(k);
  for (Int k = 32; bit_length(k) <= 16; k <<= 1) ks.push_back(k);
  for (const Int& k : ks) {
    Int nk;
    try {
      nk = kth_member(A, k, cfg);
    } catch (const StructureError&) {
      break;  // finite within budget: report what we have
    } catch (const BudgetError&) {
      break;
    }
    Ival val;
    bool got = false;
    for (unsigned prec = cfg.prec_start; prec <= cfg.prec_cap; prec *= 2) {
      auto u = f.eval(Rat(nk), prec, cfg);
      auto v = f.eval(Rat(k), prec, cfg);
      if (u && v) {
        auto r = try_div(*u, *v);
        if (r) {
          val = *r;
          got = true;
          break;
        }
      }
    }
    if (!got) break;
    out.growth.emplace_back(k, val);
    if (!out.threshold_k && val.lo > threshold) {
      out.threshold_k = k;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint schedules.
// ---------------------------------------------------------------------------

inline std::vector<Int> geo_checkpoints(const Int& a, const Int& b, const Int& factor = 10) {
  if (a < 1 || b < a || factor < 2) throw DomainError("geo_checkpoints: bad schedule");
  std::vector<Int> out;
  for (Int n = a; n <= b; n *= factor) out.push_back(n);
  if (out.empty() || out.back() != b) out.push_back(b);
  return out;
}

inline std::vector<Int> block_checkpoints(const BlockDecomposition& D) {
  std::vector<Int> out = D.starts;
  if (!out.empty() && out.front() < 1) throw Error("bad block starts");
  return out;
}

}  // namespace charsub
