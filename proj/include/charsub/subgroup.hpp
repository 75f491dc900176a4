#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "charsub/circle.hpp"
#include "charsub/density.hpp"
#include "charsub/dsl.hpp"

namespace charsub {

// ---------------------------------------------------------------------------
// Fast digit window: preloads support intervals and ratios so that the
// n <= N scan loops cost small-integer work per digit.
// ---------------------------------------------------------------------------

class DigitWindow {
 public:
  DigitWindow(const CircleElem& x, const ArithSeq& seq, const Int& upto, const Config& cfg)
      : x_(&x), seq_(&seq), cfg_(&cfg), upto_(upto) {
    std::size_t cap = upto.convert_to<std::size_t>();
    ratios_.reserve(cap);
    for (Int n = 1; n <= upto; ++n) ratios_.push_back(seq.ratio(n, cfg));
    if (!x.is_rational() && x.support_set()) {
      rule_backed_ = true;
      for (const auto& iv : x.support_set()->intervals_in(1, upto, cfg))
        supp_.emplace_back(iv.lo, iv.hi_or(upto));
    }
  }

  const Int& ratio(const Int& n) const { return ratios_[n.convert_to<std::size_t>() - 1]; }

  bool in_support(const Int& n) const {
    auto it = std::upper_bound(supp_.begin(), supp_.end(), n,
                               [](const Int& v, const std::pair<Int, Int>& iv) { return v < iv.first; });
    if (it == supp_.begin()) return false;
    --it;
    return n >= it->first && n <= it->second;
  }

  Int digit(const Int& n) const {
    if (!rule_backed_) return x_->digit(*seq_, n, *cfg_);
    if (!in_support(n)) return 0;
    return x_->digit(*seq_, n, *cfg_);
  }

  /// Interval [s, s+w] containing {a_n x}, from a depth-K digit tail.
  Ival frac(const Int& n, unsigned K) const {
    Int numer = 0, denom = 1;
    for (Int k = n + Int(K); k > n; --k) {
      numer += digit(k) * denom;
      denom *= ratio(k);
    }
    Rat s(numer, denom);
    return Ival{s, Rat(s + Rat(Int(1), denom))};
  }

  Ival norm(const Int& n, unsigned K) const { return norm_from_frac(frac(n, K)); }

 private:
  const CircleElem* x_;
  const ArithSeq* seq_;
  const Config* cfg_;
  Int upto_;
  std::vector<Int> ratios_;
  std::vector<std::pair<Int, Int>> supp_;
  bool rule_backed_ = false;
};

// ---------------------------------------------------------------------------
// Exception sets: E_eps = {n <= N : ||a_n x|| >= eps}, exact on determinate
// indices. Rational elements classify exactly via the modular route; digit
// streams use certified intervals with auto-deepened tails.
// ---------------------------------------------------------------------------

struct ExceptionSet {
  Rat eps;
  Int N;
  NSet prefix;                    // determinate members
  std::vector<Int> indeterminate; // norm interval straddles eps at the cap
};

inline ExceptionSet exception_set(const CircleElem& x, const ArithSeq& seq, const Rat& eps,
                                  const Int& N, const Config& cfg = default_config()) {
  if (eps <= 0 || eps >= Rat(1, 2)) throw DomainError("exception_set: eps must be in (0, 1/2)");
  if (N < 1) throw DomainError("exception_set: N must be >= 1");
  ExceptionSet out{eps, N, {}, {}};
  std::vector<std::pair<Int, Int>> runs;
  auto push = [&](const Int& n) {
    if (!runs.empty() && runs.back().second == n - 1) runs.back().second = n;
    else runs.emplace_back(n, n);
  };
  if (x.is_rational()) {
    for (Int n = 1; n <= N; ++n)
      if (norm_exact(x, seq, n, cfg) >= eps) push(n);
  } else {
    DigitWindow win(x, seq, N + Int(cfg.prec_cap) + 2, cfg);
    for (Int n = 1; n <= N; ++n) {
      bool decided = false;
      for (unsigned K = cfg.prec_start + cfg.tail_guard; K <= cfg.prec_cap; K *= 2) {
        Ival nv = win.norm(n, K);
        if (nv.lo >= eps) {
          push(n);
          decided = true;
          break;
        }
        if (nv.hi < eps) {
          decided = true;
          break;
        }
      }
      if (!decided) out.indeterminate.push_back(n);
    }
  }
  out.prefix = nset_intervals(std::move(runs));
  return out;
}

// ---------------------------------------------------------------------------
// Convergence reports.
// ---------------------------------------------------------------------------

/// Default checkpoint schedule: block starts (the natural scale), with a
/// geometric fallback when the block scan cannot be decided exactly.
inline std::vector<Int> default_checkpoints(const ModulusFn& f, const WeightFn& g, const Int& N,
                                            const Config& cfg = default_config()) {
  std::vector<Int> cps;
  if (!fg_exactly_comparable(f, g)) {
    // block boundaries for this pair have no exact comparison route; the
    // geometric schedule is the documented alternative
    return geo_checkpoints(std::min(Int(10), N), N);
  }
  try {
    BlockDecomposition D{f, g.nondecreasing() ? g : monotone_envelope(g, cfg), {Int(1)}, false};
    for (int k = 0; k < 128; ++k) {
      const Int base = D.starts.back();
      auto pred = [&](const Int& n) {
        return order_fg_scaled(f, D.g, n, Rat(2), base, cfg) != Ord::lt;
      };
      Int lo = base, hi = base + 1;
      bool found = false;
      while (bit_length(hi) <= cfg.magnitude_cap_bits) {
        if (pred(hi)) {
          found = true;
          break;
        }
        lo = hi;
        hi <<= 1;
      }
      if (!found || D.starts.back() > N) break;
      while (lo + 1 < hi) {
        Int mid = (lo + hi) >> 1;
        if (mid <= base) mid = base + 1;
        if (pred(mid)) hi = mid; else lo = mid;
      }
      if (hi > N) break;
      D.starts.push_back(hi);
    }
    cps = D.starts;
  } catch (const Error&) {
    cps.clear();
  }
  if (cps.size() < 4) cps = geo_checkpoints(std::min(Int(10), N), N);
  if (cps.back() != N) cps.push_back(N);
  return cps;
}

struct PerEps {
  Rat eps;
  ExceptionSet exceptions;
  DensityTrajectory traj;
  DensityVerdict verdict;
};

struct ConvergenceReport {
  enum class Overall { member_at_scale, nonmember_evidence, indeterminate };
  std::vector<PerEps> per_eps;
  Overall overall;
  Int N;

  std::string overall_str() const {
    switch (overall) {
      case Overall::member_at_scale: return "member-at-scale";
      case Overall::nonmember_evidence: return "nonmember-evidence";
      case Overall::indeterminate: return "indeterminate";
    }
    return "?";
  }
};

namespace detail {

inline ConvergenceReport assemble_report(std::vector<PerEps> rows, const Int& N) {
  ConvergenceReport rep{std::move(rows), ConvergenceReport::Overall::indeterminate, N};
  bool all_null = true, any_pos = false, any_indet_idx = false;
  for (const auto& r : rep.per_eps) {
    if (!r.exceptions.indeterminate.empty()) any_indet_idx = true;
    if (r.verdict.kind != DensityVerdict::Kind::null_at_scale) all_null = false;
    if (r.verdict.kind == DensityVerdict::Kind::positive_at_scale) any_pos = true;
  }
  if (all_null && !any_indet_idx) rep.overall = ConvergenceReport::Overall::member_at_scale;
  else if (any_pos) rep.overall = ConvergenceReport::Overall::nonmember_evidence;
  return rep;
}

}  // namespace detail

inline ConvergenceReport convergence_report(const CircleElem& x, const ArithSeq& seq,
                                            const ModulusFn& f, const WeightFn& g,
                                            const std::vector<Rat>& epses, const Int& N,
                                            std::optional<std::vector<Int>> checkpoints = std::nullopt,
                                            const Config& cfg = default_config()) {
  if (epses.empty()) throw DomainError("convergence_report: no eps values");
  std::vector<Int> cps = checkpoints ? *checkpoints : default_checkpoints(f, g, N, cfg);
  std::vector<PerEps> rows;
  for (const Rat& eps : epses) {
    ExceptionSet E = exception_set(x, seq, eps, N, cfg);
    DensityTrajectory t = trajectory(E.prefix, f, g, cps, cfg);
    DensityVerdict v = classify(t, cfg);
    rows.push_back(PerEps{eps, std::move(E), std::move(t), v});
  }
  return detail::assemble_report(std::move(rows), N);
}

// ---------------------------------------------------------------------------
// Certificates: machine-checkable membership / non-membership evidence with
// exact bands, serialized to a replayable text record.
// ---------------------------------------------------------------------------

struct Certificate {
  enum class Kind {
    membership_support,    // support density null: off-A* norms under 2^-k
    membership_structure,  // block/gap structure: off-A norms under 2^-m
    nonmember_qbounded,    // {a_n x} in [1/M^2, 1/2] on B
    nonmember_ratio_band   // {a_n x} in [m1, 2 m2] on B
  };
  Kind kind;
  std::string seq_dsl, elem_dsl, f_dsl, g_dsl, witness_dsl;
  Rat band_lo, band_hi;  // fractional-part band (nonmember) / norm bound (member: [0, hi])
  Int k;                 // tail index k or m for membership kinds; 0 otherwise
  Int N;
  std::vector<Int> checkpoints;
  std::string density_verdict;
  std::vector<std::pair<std::string, std::string>> extras;

  static std::string kind_str(Kind k) {
    switch (k) {
      case Kind::membership_support: return "membership-by-support";
      case Kind::membership_structure: return "membership-by-structure";
      case Kind::nonmember_qbounded: return "nonmembership-qbounded";
      case Kind::nonmember_ratio_band: return "nonmembership-ratio-band";
    }
    return "?";
  }
  static Kind kind_from(const std::string& s) {
    if (s == "membership-by-support") return Kind::membership_support;
    if (s == "membership-by-structure") return Kind::membership_structure;
    if (s == "nonmembership-qbounded") return Kind::nonmember_qbounded;
    if (s == "nonmembership-ratio-band") return Kind::nonmember_ratio_band;
    throw ParseError("unknown certificate kind: " + s, 0);
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "charsub-certificate v1\n";
    os << "kind: " << kind_str(kind) << "\n";
    os << "seq: " << seq_dsl << "\n";
    os << "elem: " << elem_dsl << "\n";
    os << "f: " << f_dsl << "\n";
    os << "g: " << g_dsl << "\n";
    os << "band: " << rat_str(band_lo) << " " << rat_str(band_hi) << "\n";
    os << "k: " << k.str() << "\n";
    os << "N: " << N.str() << "\n";
    os << "witness: " << witness_dsl << "\n";
    os << "checkpoints:";
    for (const Int& c : checkpoints) os << " " << c.str();
    os << "\n";
    os << "density_verdict: " << density_verdict << "\n";
    for (const auto& [key, val] : extras) os << "x-" << key << ": " << val << "\n";
    os << "end\n";
    return os.str();
  }

  static Certificate from_text(const std::string& text) {
    Certificate c{};
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "charsub-certificate v1")
      throw ParseError("bad certificate header", 0);
    bool ended = false;
    while (std::getline(is, line)) {
      if (line == "end") {
        ended = true;
        break;
      }
      auto colon = line.find(": ");
      if (colon == std::string::npos) {
        if (line == "checkpoints:") continue;  // empty list
        throw ParseError("bad certificate line: " + line, 0);
      }
      std::string key = line.substr(0, colon), val = line.substr(colon + 2);
      if (key == "kind") c.kind = kind_from(val);
      else if (key == "seq") c.seq_dsl = val;
      else if (key == "elem") c.elem_dsl = val;
      else if (key == "f") c.f_dsl = val;
      else if (key == "g") c.g_dsl = val;
      else if (key == "witness") c.witness_dsl = val;
      else if (key == "k") c.k = parse_int(val);
      else if (key == "N") c.N = parse_int(val);
      else if (key == "density_verdict") c.density_verdict = val;
      else if (key == "band") {
        auto sp = val.find(' ');
        c.band_lo = parse_rat(val.substr(0, sp));
        c.band_hi = parse_rat(val.substr(sp + 1));
      } else if (key == "checkpoints") {
        std::istringstream ls(val);
        std::string tok;
        while (ls >> tok) c.checkpoints.push_back(parse_int(tok));
      } else if (key.rfind("x-", 0) == 0) {
        c.extras.emplace_back(key.substr(2), val);
      } else {
        throw ParseError("unknown certificate key: " + key, 0);
      }
    }
    if (!ended) throw ParseError("certificate missing end marker", 0);
    return c;
  }

  std::optional<std::string> extra(const std::string& key) const {
    for (const auto& [k2, v] : extras)
      if (k2 == key) return v;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Membership by support density (the sufficient condition with shifts):
// A* = union of (A - i) for i <= k; off A*, k+1 zero digits give
// ||a_n x|| <= a_n/a_{n+k} <= 2^-k < 1/k.
// ---------------------------------------------------------------------------

inline NSet shifted_union(const NSet& base, const Int& m) {
  NSet out = base;
  for (Int i = 1; i <= m; ++i) out = nset_union(out, nset_shift(base, i));
  return out;
}

inline Certificate membership_by_support(const CircleElem& x, const ArithSeq& seq,
                                         const ModulusFn& f, const WeightFn& g, const Int& k,
                                         const Int& N, const Config& cfg = default_config()) {
  if (k < 1) throw DomainError("membership_by_support: k must be >= 1");
  unsigned ku = k.convert_to<unsigned>();
  NSet supp = x.is_rational() ? support_prefix(x, seq, N + k + 1, cfg) : *x.support_set();
  NSet astar = shifted_union(supp, k);
  DigitWindow win(x, seq, N + k + 1, cfg);
  for (Int n = 1; n <= N; ++n) {
    if (astar.member(n, cfg)) continue;
    for (Int i = 0; i <= k; ++i)
      if (win.digit(n + i) != 0)
        throw VerifyError("membership_by_support: nonzero digit at " + Int(n + i).str() +
                          " off the witness set (implementation bug)");
    Ival nv = win.norm(n, ku);
    if (nv.hi > Rat(Int(1), pow2(ku)))
      throw VerifyError("membership_by_support: norm bound violated at n=" + n.str());
  }
  // the density leg is pure endpoint counting, so its evidence extends past
  // the norm-verified range when N is small
  std::vector<Int> cps = default_checkpoints(f, g, std::max(N, Int(100000000)), cfg);
  DensityTrajectory t = trajectory(astar, f, g, cps, cfg);
  DensityVerdict v = classify(t, cfg);
  Certificate c{};
  c.kind = Certificate::Kind::membership_support;
  c.seq_dsl = seq.dsl();
  c.elem_dsl = x.dsl();
  c.f_dsl = f.dsl();
  c.g_dsl = g.dsl();
  c.witness_dsl = astar.dsl();
  c.band_lo = 0;
  c.band_hi = Rat(Int(1), pow2(ku));
  c.k = k;
  c.N = N;
  c.checkpoints = cps;
  c.density_verdict = v.str();
  return c;
}

// ---------------------------------------------------------------------------
// The structured witness from an interval family: x has max digits on the
// blocks; off A (shift-widened endpoints plus an initial segment) the norm is
// at most 2^-m, with in-block and in-gap cases both telescoping.
// ---------------------------------------------------------------------------

struct Lemma39Result {
  CircleElem x;
  Certificate cert;
  Int in_block_checks = 0;
  Int in_gap_checks = 0;
  bool endpoint_density_warning = false;
};

inline Lemma39Result lemma39_witness(const ArithSeq& seq, const IntervalFamily& fam, const Int& m,
                                     const Int& N, const ModulusFn& f, const WeightFn& g,
                                     std::optional<std::vector<Int>> density_cps = std::nullopt,
                                     const Config& cfg = default_config()) {
  if (m < 1) throw DomainError("lemma39_witness: m must be >= 1");
  unsigned mu = m.convert_to<unsigned>();
  NSet endpoints = fam.endpoints();
  NSet blocks = fam.blocks();
  CircleElem x = CircleElem::from_support(blocks, DigitRule::maxrule());

  // r0: first r with n_r > m (the proofs' minimal choice)
  Int r0 = 1, nr0;
  while (true) {
    auto v = fam.endpoint(r0, cfg);
    if (!v) throw CapError("lemma39_witness: endpoints exhausted before exceeding m");
    if (*v > m) {
      nr0 = *v;
      break;
    }
    ++r0;
  }
  // A = [1, n_{r0}] union (union over i <= m of the shifted endpoint set);
  // earlier shifted points are absorbed by the initial segment
  NSet A = nset_union(nset_intervals({{Int(1), nr0}}), shifted_union(endpoints, m));

  unsigned K = std::max<unsigned>(mu, 50);
  DigitWindow win(x, seq, N + Int(K) + 2, cfg);
  Rat bound(Int(1), pow2(mu));
  Lemma39Result out{std::move(x), {}, 0, 0, false};
  auto a_ivs = A.intervals_in(1, N, cfg);
  std::size_t ai = 0;
  for (Int n = 1; n <= N; ++n) {
    while (ai < a_ivs.size() && a_ivs[ai].hi_or(N) < n) ++ai;
    if (ai < a_ivs.size() && a_ivs[ai].contains(n)) continue;
    Ival nv = win.norm(n, K);
    if (nv.hi > bound)
      throw VerifyError("lemma39_witness: norm bound violated at n=" + n.str() +
                        " (implementation bug)");
    if (win.in_support(n + 1)) ++out.in_block_checks;
    else ++out.in_gap_checks;
  }
  std::vector<Int> cps =
      density_cps ? *density_cps : default_checkpoints(f, g, std::max(N, Int(100000000)), cfg);
  DensityTrajectory t = trajectory(endpoints, f, g, cps, cfg);
  DensityVerdict v = classify(t, cfg);
  out.endpoint_density_warning = v.kind != DensityVerdict::Kind::null_at_scale;

  Certificate c{};
  c.kind = Certificate::Kind::membership_structure;
  c.seq_dsl = seq.dsl();
  c.elem_dsl = out.x.dsl();
  c.f_dsl = f.dsl();
  c.g_dsl = g.dsl();
  c.witness_dsl = A.dsl();
  c.band_lo = 0;
  c.band_hi = bound;
  c.k = m;
  c.N = N;
  c.checkpoints = cps;
  c.density_verdict = v.str();
  if (out.endpoint_density_warning) c.extras.emplace_back("warning", "endpoint density not null-at-scale");
  out.cert = std::move(c);
  return out;
}

// ---------------------------------------------------------------------------
// Non-membership bands.
// ---------------------------------------------------------------------------

namespace detail {

/// Proves {a_n x} inside [lo, hi] for all n in B cap [1, N]. Exact for
/// rational x; certified with deepening tails otherwise.
inline void verify_frac_band(const CircleElem& x, const ArithSeq& seq, const NSet& B,
                             const Int& N, const Rat& lo, const Rat& hi, const Config& cfg) {
  std::optional<DigitWindow> win;
  if (!x.is_rational()) win.emplace(x, seq, N + Int(cfg.prec_cap) + 2, cfg);
  auto check = [&](const Int& n) {
    if (x.is_rational()) {
      Rat fe = x.frac_exact(seq, n, cfg);
      if (fe < lo || fe > hi)
        throw VerifyError("frac band violated at n=" + n.str() + ": {a_n x} = " + rat_str(fe));
      return;
    }
    for (unsigned K = cfg.prec_start + cfg.tail_guard; K <= cfg.prec_cap; K *= 2) {
      Ival fv = win->frac(n, K);
      if (fv.lo >= lo && fv.hi <= hi) return;
      if (fv.hi < lo || fv.lo > hi)
        throw VerifyError("frac band violated at n=" + n.str());
    }
    throw PrecisionError("frac band undecidable at n=" + n.str());
  };
  auto st = B.stream(cfg);
  while (auto iv = st->next()) {
    if (iv->lo > N) break;
    for (Int n = std::max(Int(1), iv->lo); n <= iv->hi_or(N) && n <= N; ++n) check(n);
    if (!iv->bounded() || *iv->hi >= N) break;
  }
}

}  // namespace detail

/// Maximal runs [l_i, k_i] of the support prefix; gaps of length >= 2 required.
inline std::vector<std::pair<Int, Int>> support_runs(const CircleElem& x, const ArithSeq& seq,
                                                     const Int& upto, const Config& cfg) {
  NSet supp = support_prefix(x, seq, upto, cfg);
  auto ivs = supp.intervals_in(1, upto, cfg);
  std::vector<std::pair<Int, Int>> runs;
  for (const auto& iv : ivs) {
    Int lo = iv.lo, hi = iv.hi_or(upto);
    if (!runs.empty() && runs.back().second + 1 == lo) runs.back().second = hi;
    else runs.emplace_back(lo, hi);
  }
  return runs;
}

inline Certificate qbounded_nonmembership(const CircleElem& x, const ArithSeq& seq,
                                          const ModulusFn& f, const WeightFn& g, const Int& N,
                                          const Config& cfg = default_config()) {
  if (!seq.bound())
    throw CapabilityError("qbounded_nonmembership requires a q-bounded sequence");
  Int M = *seq.bound();
  auto runs = support_runs(x, seq, N + 2, cfg);
  if (runs.empty()) throw StructureError("qbounded_nonmembership: empty support prefix");
  std::vector<Int> bpts;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i + 1 < runs.size() && runs[i + 1].first <= runs[i].second + 1)
      throw StructureError("qbounded_nonmembership: runs not separated at index " +
                           std::to_string(i));
    if (i + 1 < runs.size() && runs[i + 1].first == runs[i].second + 2)
      throw StructureError("qbounded_nonmembership: gap of length 1 after run " +
                           std::to_string(i) + " (need l_{n+1} - 1 > k_n)");
    Int b = runs[i].first - 2;
    if (b >= 1 && b <= N) bpts.push_back(b);
  }
  if (bpts.empty()) throw StructureError("qbounded_nonmembership: witness set B empty on prefix");
  NSet B = nset_finite(bpts);
  Rat lo(Int(1), Int(M * M)), hi(1, 2);
  detail::verify_frac_band(x, seq, B, N, lo, hi, cfg);
  std::vector<Int> cps = default_checkpoints(f, g, N, cfg);
  DensityTrajectory t = trajectory(B, f, g, cps, cfg);
  DensityVerdict v = classify(t, cfg);

  Certificate c{};
  c.kind = Certificate::Kind::nonmember_qbounded;
  c.seq_dsl = seq.dsl();
  c.elem_dsl = x.dsl();
  c.f_dsl = f.dsl();
  c.g_dsl = g.dsl();
  c.witness_dsl = B.dsl();
  c.band_lo = lo;
  c.band_hi = hi;
  c.k = 0;
  c.N = N;
  c.checkpoints = cps;
  c.density_verdict = v.str();
  c.extras.emplace_back("M", M.str());
  c.extras.emplace_back("density_leg", "at-scale evidence only (finite checkpoints)");
  return c;
}

inline Certificate ratio_band_nonmembership(const CircleElem& x, const ArithSeq& seq,
                                            const Rat& m1, const Rat& m2, const ModulusFn& f,
                                            const WeightFn& g, const Int& N,
                                            const Config& cfg = default_config()) {
  if (!(0 < m1 && m1 <= m2 && m2 < Rat(1, 2)))
    throw DomainError("ratio_band_nonmembership: need 0 < m1 <= m2 < 1/2");
  // precondition: c_n/q_n in [m1, m2] on the support prefix (exact)
  NSet supp = support_prefix(x, seq, N + 1, cfg);
  {
    auto st = supp.stream(cfg);
    while (auto iv = st->next()) {
      if (iv->lo > N + 1) break;
      for (Int n = iv->lo; n <= iv->hi_or(N + 1); ++n) {
        Rat ratio(x.digit(seq, n, cfg), seq.ratio(n, cfg));
        if (ratio < m1 || ratio > m2)
          throw StructureError("ratio_band precondition fails at n=" + n.str() + ": c_n/q_n = " +
                               rat_str(ratio));
      }
      if (!iv->bounded() || *iv->hi >= N + 1) break;
    }
  }
  NSet B = nset_shift(supp, 1);
  Rat hi = 2 * m2;
  detail::verify_frac_band(x, seq, B, N, m1, hi, cfg);
  std::vector<Int> cps = default_checkpoints(f, g, N, cfg);
  DensityTrajectory t = trajectory(B, f, g, cps, cfg);
  DensityVerdict v = classify(t, cfg);

  Certificate c{};
  c.kind = Certificate::Kind::nonmember_ratio_band;
  c.seq_dsl = seq.dsl();
  c.elem_dsl = x.dsl();
  c.f_dsl = f.dsl();
  c.g_dsl = g.dsl();
  c.witness_dsl = B.dsl();
  c.band_lo = m1;
  c.band_hi = hi;
  c.k = 0;
  c.N = N;
  c.checkpoints = cps;
  c.density_verdict = v.str();
  c.extras.emplace_back("m1", rat_str(m1));
  c.extras.emplace_back("m2", rat_str(m2));
  return c;
}

// ---------------------------------------------------------------------------
// The two-way probe: positive density yields a non-membership certificate
// for a band element supported on B; null density yields a membership
// certificate for the max element on B.
// ---------------------------------------------------------------------------

struct ProbeResult {
  enum class Outcome { nonmember_cert, member_cert, capability_note, indeterminate } outcome;
  std::optional<CircleElem> x;
  std::optional<Certificate> cert;
  std::string note;
};

inline ProbeResult corollary319_probe(const ArithSeq& seq, const NSet& B, const ModulusFn& f,
                                      const WeightFn& g, const Int& N,
                                      const Config& cfg = default_config()) {
  std::vector<Int> cps = default_checkpoints(f, g, N, cfg);
  DensityTrajectory t = trajectory(B, f, g, cps, cfg);
  DensityVerdict v = classify(t, cfg);
  ProbeResult out{ProbeResult::Outcome::indeterminate, std::nullopt, std::nullopt, ""};
  if (v.kind == DensityVerdict::Kind::null_at_scale) {
    CircleElem x = CircleElem::from_support(B, DigitRule::maxrule());
    Int k = 8;
    out.outcome = ProbeResult::Outcome::member_cert;
    out.cert = membership_by_support(x, seq, f, g, k, N, cfg);
    out.x = std::move(x);
    return out;
  }
  if (v.kind != DensityVerdict::Kind::positive_at_scale) {
    out.note = "density evidence for B indeterminate at scale";
    return out;
  }
  // positive: build the band element; digits stay strictly below q_n/2
  Rat m1(1, 2), m2(0);
  bool q2_seen = false;
  {
    auto st = B.stream(cfg);
    while (auto iv = st->next()) {
      if (iv->lo > N) break;
      for (Int n = iv->lo; n <= iv->hi_or(N) && n <= N; ++n) {
        Int q = seq.ratio(n, cfg);
        if (q < 3) {
          q2_seen = true;
          break;
        }
        Rat r(Int(ceil_div(q, Int(2)) - 1), q);
        m1 = std::min(m1, r);
        m2 = std::max(m2, r);
      }
      if (q2_seen || !iv->bounded() || *iv->hi >= N) break;
    }
  }
  if (q2_seen) {
    if (seq.bound()) {
      // q-bounded fallback: the run-structure band of the bounded-ratio case
      CircleElem x = CircleElem::from_support(B, DigitRule::maxrule());
      try {
        out.cert = qbounded_nonmembership(x, seq, f, g, N, cfg);
        out.x = std::move(x);
        out.outcome = ProbeResult::Outcome::nonmember_cert;
        return out;
      } catch (const StructureError& e) {
        out.outcome = ProbeResult::Outcome::capability_note;
        out.note = std::string("q-bounded fallback failed run structure: ") + e.what();
        return out;
      }
    }
    out.outcome = ProbeResult::Outcome::capability_note;
    out.note = "q_n = 2 occurs on B while the sequence is not q-bounded; no band "
               "construction is available for this case";
    return out;
  }
  CircleElem x = CircleElem::from_support(B, DigitRule::nearhalfrule());
  out.cert = ratio_band_nonmembership(x, seq, m1, m2, f, g, N, cfg);
  out.x = std::move(x);
  out.outcome = ProbeResult::Outcome::nonmember_cert;
  return out;
}

// ---------------------------------------------------------------------------
// Certificate re-verification: parse-and-replay; reproduces the band checks
// and the recorded density verdict.
// ---------------------------------------------------------------------------

struct VerifyResult {
  bool pass;
  std::string detail;
};

inline VerifyResult verify_certificate(const Certificate& c, const Config& cfg = default_config()) {
  try {
    ArithSeq seq = parse_seq(c.seq_dsl);
    CircleElem x = parse_elem(c.elem_dsl);
    ModulusFn f = parse_modulus(c.f_dsl);
    WeightFn g = parse_weight(c.g_dsl);
    NSet W = parse_nset(c.witness_dsl);
    if (c.kind == Certificate::Kind::membership_support ||
        c.kind == Certificate::Kind::membership_structure) {
      unsigned ku = c.k.convert_to<unsigned>();
      unsigned K = std::max<unsigned>(ku, 50);
      DigitWindow win(x, seq, c.N + Int(K) + 2, cfg);
      auto w_ivs = W.intervals_in(1, c.N, cfg);
      std::size_t wi = 0;
      for (Int n = 1; n <= c.N; ++n) {
        while (wi < w_ivs.size() && w_ivs[wi].hi_or(c.N) < n) ++wi;
        if (wi < w_ivs.size() && w_ivs[wi].contains(n)) continue;
        Ival nv = win.norm(n, K);
        if (nv.hi > c.band_hi)
          return {false, "norm bound fails at n=" + n.str()};
      }
    } else {
      detail::verify_frac_band(x, seq, W, c.N, c.band_lo, c.band_hi, cfg);
    }
    DensityTrajectory t = trajectory(W, f, g, c.checkpoints, cfg);
    DensityVerdict v = classify(t, cfg);
    if (v.str() != c.density_verdict)
      return {false, "density verdict mismatch: recorded " + c.density_verdict + ", replay " +
                         v.str()};
    return {true, "bands and density verdict reproduced"};
  } catch (const Error& e) {
    return {false, e.what()};
  }
}

// ---------------------------------------------------------------------------
// Sums at scale: x + y through partial rationals with a certified error,
// classified per index by the modular route plus the error margin.
// ---------------------------------------------------------------------------

inline ConvergenceReport sum_convergence_report(const CircleElem& x, const CircleElem& y,
                                                const ArithSeq& seq, const ModulusFn& f,
                                                const WeightFn& g, const std::vector<Rat>& epses,
                                                const Int& N, const Int& guard_digits = 64,
                                                const Config& cfg = default_config()) {
  Int D = N + guard_digits;
  ApproxElem ax = partial_rational(x, seq, D, cfg);
  ApproxElem ay = partial_rational(y, seq, D, cfg);
  Rat sum = ax.value + ay.value;
  if (sum >= 1) sum -= 1;
  Rat err = ax.err + ay.err;  // true x+y in [sum, sum+err) mod 1
  const Int& den_sum = den(sum);

  // delta_n = a_n * err decreasing from n = N downward
  std::vector<Rat> delta(N.convert_to<std::size_t>() + 1, Rat(0));
  {
    Rat tail = err;  // will become a_n * err by multiplying ratios upward
    // a_n * err = err * prod_{i<=n} q_i; iterate n = 1..N
    Rat acc = err;
    for (Int n = 1; n <= N; ++n) {
      acc *= seq.ratio(n, cfg);
      delta[n.convert_to<std::size_t>()] = acc;
    }
    (void)tail;
  }
  // modular state for {a_n * sum}
  Int mod_state = num(sum) % den_sum;
  std::vector<PerEps> rows;
  std::vector<std::vector<std::pair<Int, Int>>> runs(epses.size());
  std::vector<std::vector<Int>> indet(epses.size());
  // single upward pass over n, classifying against every eps
  std::vector<Rat> norms(N.convert_to<std::size_t>() + 1);
  for (Int n = 1; n <= N; ++n) {
    mod_state = mod_state * seq.ratio(n, cfg) % den_sum;
    Rat frac(mod_state, den_sum);
    norms[n.convert_to<std::size_t>()] = std::min(frac, Rat(Rat(1) - frac));
  }
  for (std::size_t e = 0; e < epses.size(); ++e) {
    const Rat& eps = epses[e];
    if (eps <= 0 || eps >= Rat(1, 2)) throw DomainError("sum report: eps out of range");
    for (Int n = 1; n <= N; ++n) {
      std::size_t i = n.convert_to<std::size_t>();
      // true norm within delta of the computed one (wrap-safe since norm is
      // 1-Lipschitz on the circle)
      if (norms[i] - delta[i] >= eps) {
        auto& rr = runs[e];
        if (!rr.empty() && rr.back().second == n - 1) rr.back().second = n;
        else rr.emplace_back(n, n);
      } else if (norms[i] + delta[i] >= eps) {
        indet[e].push_back(n);
      }
    }
  }
  std::vector<Int> cps = default_checkpoints(f, g, N, cfg);
  for (std::size_t e = 0; e < epses.size(); ++e) {
    ExceptionSet E{epses[e], N, nset_intervals(runs[e]), std::move(indet[e])};
    DensityTrajectory t = trajectory(E.prefix, f, g, cps, cfg);
    DensityVerdict v = classify(t, cfg);
    rows.push_back(PerEps{epses[e], std::move(E), std::move(t), v});
  }
  return detail::assemble_report(std::move(rows), N);
}

}  // namespace charsub
