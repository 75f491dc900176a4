#include "charsub/subgroup.hpp"

#include <gtest/gtest.h>

using namespace charsub;

namespace {

const Config& cfg() { return default_config(); }

TEST(ExceptionSet, OneEighthBaseThree) {
  ArithSeq q3 = ArithSeq::const_ratio(3);
  CircleElem x = CircleElem::rational(Rat(1, 8));
  // eps = 1/5: norms alternate 3/8 (odd) and 1/8 (even); E = odd numbers
  ExceptionSet E = exception_set(x, q3, Rat(1, 5), 10);
  EXPECT_TRUE(E.indeterminate.empty());
  for (long n = 1; n <= 10; ++n) EXPECT_EQ(E.prefix.member(Int(n)), n % 2 == 1) << n;
  // eps = 1/10: everything is an exception
  ExceptionSet E2 = exception_set(x, q3, Rat(1, 10), 10);
  EXPECT_EQ(E2.prefix.count(10), 10);
  // x = 0: empty
  ExceptionSet E3 = exception_set(CircleElem::rational(Rat(0)), q3, Rat(1, 5), 10);
  EXPECT_EQ(E3.prefix.count(10), 0);
}

TEST(ExceptionSet, AntitoneInEps) {
  ArithSeq q3 = ArithSeq::const_ratio(3);
  CircleElem x = CircleElem::rational(Rat(5, 17));
  ExceptionSet big = exception_set(x, q3, Rat(1, 20), 200);
  ExceptionSet small = exception_set(x, q3, Rat(1, 5), 200);
  for (long n = 1; n <= 200; ++n)
    if (small.prefix.member(Int(n))) EXPECT_TRUE(big.prefix.member(Int(n))) << n;
}

TEST(ExceptionSet, StreamElementMatchesRationalTwin) {
  // support {2,4,6,...} with max rule over q=3 gives digits of... a stream
  // element classified by intervals; cross-check against the exact rational
  ArithSeq q3 = ArithSeq::const_ratio(3);
  CircleElem stream = CircleElem::from_support(nset_progression(2, 2), DigitRule::construle(1));
  // sum 1/9^k = 1/8
  CircleElem rat = CircleElem::rational(Rat(1, 8));
  ExceptionSet Es = exception_set(stream, q3, Rat(1, 5), 60);
  ExceptionSet Er = exception_set(rat, q3, Rat(1, 5), 60);
  EXPECT_TRUE(Es.indeterminate.empty());
  EXPECT_TRUE(sets_equal_on(Es.prefix, Er.prefix, 60));
}

TEST(Convergence, SpecExamples) {
  ArithSeq q3 = ArithSeq::const_ratio(3);
  // x = 0: member-at-scale
  auto r0 = convergence_report(CircleElem::rational(Rat(0)), q3, modulus_identity(), weight_n(),
                               {Rat(1, 4), Rat(1, 16)}, 1000);
  EXPECT_EQ(r0.overall, ConvergenceReport::Overall::member_at_scale);
  // x = 1/8, eps = 1/10: E = N prefix, positive-at-scale, nonmember evidence
  auto r1 = convergence_report(CircleElem::rational(Rat(1, 8)), q3, modulus_identity(), weight_n(),
                               {Rat(1, 10)}, 1000);
  EXPECT_EQ(r1.overall, ConvergenceReport::Overall::nonmember_evidence);
  // the paper's pair (log(1+x), sqrt(n)) gives the same classification
  auto r2 = convergence_report(CircleElem::rational(Rat(1, 8)), q3, modulus_log1p(), weight_sqrt(),
                               {Rat(1, 10)}, 1000);
  EXPECT_EQ(r2.overall, ConvergenceReport::Overall::nonmember_evidence);
}

TEST(Convergence, ExampleThreeFiveMemberAtScale) {
  // under (id, n): the exception prefix is a handful of block-edge indices,
  // so the exact classification certifies null density at N = 10^5
  ArithSeq q2 = ArithSeq::const_ratio(2);
  NSet supp = parse_nset("union k in 1.. : [(2*k-1)^(2*k-1), (2*k)^(2*k)]");
  CircleElem x = CircleElem::from_support(supp, DigitRule::maxrule());
  auto rep = convergence_report(x, q2, modulus_identity(), weight_n(),
                                {Rat(1, 4), Rat(1, 32)}, 100000);
  EXPECT_EQ(rep.overall, ConvergenceReport::Overall::member_at_scale);
  for (const auto& pe : rep.per_eps) {
    EXPECT_TRUE(pe.exceptions.indeterminate.empty());
    EXPECT_EQ(pe.verdict.kind, DensityVerdict::Kind::null_at_scale);
    // every exception sits inside the structural witness: within 6 of a
    // block boundary digit change
    auto st = pe.exceptions.prefix.stream(cfg());
    while (auto iv = st->next()) {
      for (Int n = iv->lo; n <= *iv->hi; ++n) {
        bool near_edge = false;
        for (Int d = 0; d <= 6 && !near_edge; ++d)
          near_edge = supp.member(n + d) != supp.member(n + d + 1);
        EXPECT_TRUE(near_edge) << n;
      }
    }
  }
}

TEST(MembershipSupport, SparsePowers) {
  // supp(x) = {2^j}, q_n = 2, k = 5: off-A* norms <= 2^-5, null trajectory
  ArithSeq q2 = ArithSeq::const_ratio(2);
  NSet supp = parse_nset("union k in 1.. : [2^k, 2^k]");
  CircleElem x = CircleElem::from_support(supp, DigitRule::maxrule());
  Certificate c = membership_by_support(x, q2, modulus_identity(), weight_n(), 5, 3000);
  EXPECT_EQ(c.band_hi, Rat(1, 32));
  EXPECT_EQ(c.density_verdict, "null-at-scale");
  // zero element: vacuous certificate
  Certificate cz = membership_by_support(CircleElem::rational(Rat(0)), q2, modulus_identity(),
                                         weight_n(), 5, 500);
  EXPECT_EQ(cz.density_verdict, "null-at-scale");
  // replay both
  EXPECT_TRUE(verify_certificate(Certificate::from_text(c.to_text())).pass);
  EXPECT_TRUE(verify_certificate(Certificate::from_text(cz.to_text())).pass);
}

TEST(Lemma39, ExampleThreeFive) {
  ArithSeq q2 = ArithSeq::const_ratio(2);
  ExprPtr rr = Expr::node(Expr::Kind::Pow, Expr::var(), Expr::var());  // n_r = r^r
  IntervalFamily fam = IntervalFamily::from_expr(rr);
  // under (log(1+x), sqrt(n)) the endpoint density decays like log log n / log n,
  // so the null verdict needs deep checkpoints (cheap: counting is endpoint
  // arithmetic) and a tolerance matched to that scale
  Config deep = cfg();
  deep.null_tol = Rat(1, 100);
  std::vector<Int> cps;
  Int p = 100;
  for (int i = 0; i < 12; ++i, p *= boost::multiprecision::pow(Int(10), 50)) cps.push_back(p);
  auto res = lemma39_witness(q2, fam, 5, 10000, modulus_log1p(), weight_sqrt(), cps, deep);
  EXPECT_FALSE(res.endpoint_density_warning);
  EXPECT_EQ(res.cert.band_hi, Rat(1, 32));
  EXPECT_GT(res.in_block_checks, 0);
  EXPECT_GT(res.in_gap_checks, 0);
  // serialized certificate replays (same tolerance context)
  Certificate back = Certificate::from_text(res.cert.to_text());
  auto v = verify_certificate(back, deep);
  EXPECT_TRUE(v.pass) << v.detail;
}

TEST(QBounded, OneEighthExample) {
  // runs l_n = k_n = 2n, B = {2n-2}, {a_n x} = 1/8 in [1/9, 1/2]
  ArithSeq q3 = ArithSeq::const_ratio(3);
  CircleElem x = CircleElem::rational(Rat(1, 8));
  Certificate c = qbounded_nonmembership(x, q3, modulus_identity(), weight_n(), 500);
  EXPECT_EQ(c.band_lo, Rat(1, 9));
  EXPECT_EQ(c.band_hi, Rat(1, 2));
  EXPECT_EQ(c.density_verdict, "positive-at-scale");
  NSet B = parse_nset(c.witness_dsl);
  for (long n = 2; n <= 498; n += 2) EXPECT_TRUE(B.member(Int(n))) << n;
  EXPECT_FALSE(B.member(Int(1)));
  EXPECT_TRUE(verify_certificate(Certificate::from_text(c.to_text())).pass);
}

TEST(QBounded, PowerOfTwoExample) {
  // x = 1/7, a_n = 2^n: runs at multiples of 3; on B, {a_n x} = 2/7 in [1/4, 1/2]
  ArithSeq q2 = ArithSeq::const_ratio(2);
  CircleElem x = CircleElem::rational(Rat(1, 7));
  Certificate c = qbounded_nonmembership(x, q2, modulus_identity(), weight_n(), 300);
  EXPECT_EQ(c.band_lo, Rat(1, 4));
  NSet B = parse_nset(c.witness_dsl);
  auto st = B.stream(cfg());
  int checked = 0;
  while (auto iv = st->next()) {
    for (Int n = iv->lo; n <= iv->hi_or(300); ++n) {
      EXPECT_EQ(x.frac_exact(q2, n), Rat(2, 7));
      ++checked;
    }
    if (!iv->bounded() || *iv->hi >= 300) break;
  }
  EXPECT_GT(checked, 50);
}

TEST(QBounded, DegenerateRejected) {
  ArithSeq q3 = ArithSeq::const_ratio(3);
  EXPECT_THROW(qbounded_nonmembership(CircleElem::rational(Rat(0)), q3, modulus_identity(),
                                      weight_n(), 100),
               StructureError);
  // unbounded sequence rejected
  ArithSeq fact = parse_seq("ratio n+1");
  EXPECT_THROW(qbounded_nonmembership(CircleElem::rational(Rat(1, 8)), fact, modulus_identity(),
                                      weight_n(), 100),
               CapabilityError);
}

TEST(RatioBand, GeometricExamples) {
  // q_n = 4, c_n = 1: {a_n x} = 1/3 in [1/4, 1/2]
  ArithSeq q4 = ArithSeq::const_ratio(4);
  CircleElem x = CircleElem::from_support(nset_progression(1, 1), DigitRule::construle(1));
  Certificate c = ratio_band_nonmembership(x, q4, Rat(1, 4), Rat(1, 4), modulus_identity(),
                                           weight_n(), 400);
  EXPECT_EQ(c.band_lo, Rat(1, 4));
  EXPECT_EQ(c.band_hi, Rat(1, 2));
  EXPECT_EQ(c.density_verdict, "positive-at-scale");
  EXPECT_TRUE(verify_certificate(Certificate::from_text(c.to_text())).pass);
  // the exact value: x = sum 4^-k = 1/3, {a_n x} = 1/3 for all n
  CircleElem third = CircleElem::rational(Rat(1, 3));
  EXPECT_EQ(third.frac_exact(q4, 7), Rat(1, 3));

  // q_n = 5, c_n = 2: x = 1/2, band [2/5, 4/5]
  ArithSeq q5 = ArithSeq::const_ratio(5);
  CircleElem h = CircleElem::from_support(nset_progression(1, 1), DigitRule::construle(2));
  Certificate c2 = ratio_band_nonmembership(h, q5, Rat(2, 5), Rat(2, 5), modulus_identity(),
                                            weight_n(), 300);
  EXPECT_EQ(c2.band_hi, Rat(4, 5));

  // half rule with even q: ratio 1/2 out of band
  ArithSeq q6 = ArithSeq::const_ratio(6);
  CircleElem bad = CircleElem::from_support(nset_progression(1, 1), DigitRule::halfrule());
  EXPECT_THROW(ratio_band_nonmembership(bad, q6, Rat(1, 3), Rat(1, 3), modulus_identity(),
                                        weight_n(), 50),
               StructureError);
  // m2 = 1/2 rejected outright
  EXPECT_THROW(ratio_band_nonmembership(bad, q6, Rat(1, 2), Rat(1, 2), modulus_identity(),
                                        weight_n(), 50),
               DomainError);
}

TEST(Probe, BothDirections) {
  ArithSeq q4 = ArithSeq::const_ratio(4);
  // null direction: sparse B
  NSet sparse = parse_nset("union k in 1.. : [k^k, k^k]");
  ProbeResult r1 = corollary319_probe(q4, sparse, modulus_identity(), weight_n(), 2000);
  EXPECT_EQ(r1.outcome, ProbeResult::Outcome::member_cert);
  ASSERT_TRUE(r1.cert.has_value());
  EXPECT_TRUE(verify_certificate(*r1.cert).pass);
  // positive direction: B = N over q = 4 -> band [1/4, 1/2]
  ProbeResult r2 = corollary319_probe(q4, nset_progression(1, 1), modulus_identity(), weight_n(),
                                      400);
  EXPECT_EQ(r2.outcome, ProbeResult::Outcome::nonmember_cert);
  ASSERT_TRUE(r2.cert.has_value());
  EXPECT_EQ(r2.cert->band_lo, Rat(1, 4));
  EXPECT_EQ(r2.cert->band_hi, Rat(1, 2));
  EXPECT_TRUE(verify_certificate(*r2.cert).pass);
  // finite B: trivially null -> membership
  ProbeResult r3 = corollary319_probe(q4, nset_finite({Int(3), Int(9)}), modulus_identity(),
                                      weight_n(), 500);
  EXPECT_EQ(r3.outcome, ProbeResult::Outcome::member_cert);
  // q = 2 on B with unbounded ratios: capability note
  ArithSeq mixed = parse_seq("ratio n+1");
  // B includes n = 1 where q_1 = 2
  ProbeResult r4 = corollary319_probe(mixed, nset_progression(1, 1), modulus_identity(),
                                      weight_n(), 200);
  EXPECT_EQ(r4.outcome, ProbeResult::Outcome::capability_note);
}

TEST(Certificates, TamperingDetected) {
  ArithSeq q3 = ArithSeq::const_ratio(3);
  CircleElem x = CircleElem::rational(Rat(1, 8));
  Certificate c = qbounded_nonmembership(x, q3, modulus_identity(), weight_n(), 200);
  // narrow the band below the actual values: replay must fail
  Certificate bad = c;
  bad.band_hi = Rat(1, 10);
  EXPECT_FALSE(verify_certificate(bad).pass);
  Certificate bad2 = c;
  bad2.density_verdict = "null-at-scale";
  EXPECT_FALSE(verify_certificate(bad2).pass);
}

TEST(Closure, SumsOfMembers) {
  // rational + rule-built member elements over q_n = 2: sums member-at-scale
  ArithSeq q2 = ArithSeq::const_ratio(2);
  ModulusFn f = modulus_identity();
  WeightFn g = weight_n();
  std::vector<Rat> epses{Rat(1, 8), Rat(1, 64)};
  Int N(2000);
  NSet sparse = parse_nset("union k in 1.. : [k^k, k^k]");
  CircleElem a = CircleElem::rational(Rat(3, 16));
  CircleElem b = CircleElem::from_support(sparse, DigitRule::maxrule());
  auto ra = convergence_report(a, q2, f, g, epses, N);
  auto rb = convergence_report(b, q2, f, g, epses, N);
  ASSERT_EQ(ra.overall, ConvergenceReport::Overall::member_at_scale);
  ASSERT_EQ(rb.overall, ConvergenceReport::Overall::member_at_scale);
  auto rsum = sum_convergence_report(a, b, q2, f, g, epses, N);
  EXPECT_EQ(rsum.overall, ConvergenceReport::Overall::member_at_scale);
}

}  // namespace
