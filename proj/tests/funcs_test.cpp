#include "charsub/funcs.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace charsub;

namespace {

const Config& cfg() { return default_config(); }

Ival fval(const ModulusFn& f, const Rat& x) {
  return eval_refined(f.at(x, cfg()), 64, cfg(), "test eval");
}

TEST(Ln, KnownDigits) {
  // 0.69314718055994530 < ln 2 < 0.69314718055994531
  Ival l2 = ln_ival(Rat(2), 80);
  EXPECT_LT(l2.lo, Rat(Int("69314718055994531"), Int("100000000000000000")));
  EXPECT_GT(l2.hi, Rat(Int("69314718055994530"), Int("100000000000000000")));
  EXPECT_LE(l2.width(), Rat(1, pow2(80)));
}

TEST(Ln, HugeArgumentFromBitLength) {
  // ln(2^100) = 100 ln 2 ~ 69.3147; the +1 shifts it by under 2^-99
  Rat x = Rat(pow2(100)) + 1;
  Ival v = ln_ival(x, 64);
  EXPECT_GT(v.hi, Rat(693147, 10000));
  EXPECT_LT(v.lo, Rat(693148, 10000));
}

TEST(Ln, Reciprocal) {
  Ival v = ln_ival(Rat(1, 2), 64);
  EXPECT_LT(v.hi, 0);
  Ival w = ln_ival(Rat(2), 64);
  EXPECT_EQ(v.lo, -w.hi);
}

TEST(PowRat, ExactPerfectPowers) {
  Ival v = pow_rat_ival(Rat(9), 1, 2, 64);
  ASSERT_TRUE(v.exact());
  EXPECT_EQ(v.lo, Rat(3));
  Ival w = pow_rat_ival(Rat(8, 27), 2, 3, 64);
  ASSERT_TRUE(w.exact());
  EXPECT_EQ(w.lo, Rat(4, 9));
}

TEST(PowRat, IrrationalBounds) {
  Ival v = pow_rat_ival(Rat(2), 1, 2, 80);
  // 1.41421356237309504 < sqrt 2 < 1.41421356237309505
  EXPECT_LT(v.lo, Rat(Int("141421356237309505"), Int("100000000000000000")));
  EXPECT_GT(v.hi, Rat(Int("141421356237309504"), Int("100000000000000000")));
  EXPECT_FALSE(v.exact());
}

TEST(InvertModulus, SpecExamples) {
  EXPECT_EQ(invert_modulus(modulus_identity(), Rat(5)), 5);
  // log(1+2) = log 3 ~ 1.0986 >= 1 > log 2
  EXPECT_EQ(invert_modulus(modulus_log1p(), Rat(1)), 2);
  EXPECT_EQ(invert_modulus(modulus_pow(1, 2), Rat(3)), 9);
  EXPECT_EQ(invert_modulus(modulus_identity(), Rat(0)), 0);
  EXPECT_THROW(invert_modulus(modulus_identity(), Rat(-1)), DomainError);
}

TEST(InvertModulus, BoundedModulusReportsCapability) {
  EXPECT_THROW(invert_modulus(modulus_saturating(), Rat(2)), CapabilityError);
}

TEST(InvertModulus, ConsistencyWithEval) {
  // invert(f, f(x)) <= x for integer x
  for (const ModulusFn& f : {modulus_identity(), modulus_log1p(), modulus_pow(1, 2)}) {
    for (Int x : {Int(1), Int(7), Int(100), Int(12345)}) {
      Ival y = fval(f, Rat(x));
      EXPECT_LE(invert_modulus(f, y.lo), x) << f.dsl() << " x=" << x;
    }
  }
}

TEST(Axioms, IdentityPasses) {
  auto rep = check_modulus_axioms(modulus_identity(), {Rat(0), Rat(1), Rat(2), Rat(5)});
  EXPECT_TRUE(rep.all_pass());
}

TEST(Axioms, Log1pPasses) {
  auto rep = check_modulus_axioms(modulus_log1p(), {Rat(0), Rat(1), Rat(3), Rat(7)});
  EXPECT_TRUE(rep.all_pass());
}

TEST(Axioms, SquareFailsSubadditivity) {
  ModulusFn sq("x^2", Expr::node(Expr::Kind::Pow, Expr::var(), Expr::constant(Rat(2))), true);
  auto rep = check_modulus_axioms(sq, {Rat(1), Rat(1)});
  bool subadd_failed = false;
  for (const auto& c : rep.checks)
    if (c.axiom == "subadditive") subadd_failed = !c.pass;
  EXPECT_TRUE(subadd_failed);
}

TEST(Axioms, RandomPairsForBuiltins) {
  // subadditivity + monotonicity over pseudo-random pairs, certified
  Config fast = cfg();
  fast.prec_start = 32;
  std::mt19937_64 rng(20240817);
  std::uniform_int_distribution<long> dist(1, 1000000);
  std::vector<ModulusFn> fns = {modulus_identity(), modulus_log1p(), modulus_pow(1, 2),
                                modulus_pow(3, 4)};
  for (const auto& f : fns) {
    for (int i = 0; i < 2500; ++i) {
      Rat x(dist(rng)), y(dist(rng));
      EvalFn lhs = f.at(x + y, fast);
      EvalFn rhs = [&](unsigned prec) -> std::optional<Ival> {
        auto a = f.eval(x, prec, fast);
        auto b = f.eval(y, prec, fast);
        if (!a || !b) return std::nullopt;
        return *a + *b;
      };
      ASSERT_NE(certified_order(lhs, rhs, fast, "subadd"), Ord::gt)
          << f.dsl() << " at (" << rat_str(x) << "," << rat_str(y) << ")";
      ASSERT_NE(certified_order(f.at(std::min(x, y), fast), f.at(std::max(x, y), fast), fast,
                                "monotone"),
                Ord::gt);
    }
  }
}

WeightFn odd_even_weight() {
  // g(n) = n for odd n, n + 10 for even n; g(n) >= n so ceil(T) witnesses
  WeightFn::Evaluator ev = [](const Int& n, unsigned, const Config&) {
    return Ival(Rat(n % 2 == 1 ? n : n + 10));
  };
  WeightFn::Witness w = [](const Rat& T, const Config&) {
    Int c = ceil_rat(T);
    return c < 1 ? Int(1) : c;
  };
  return WeightFn("test-odd-even", std::move(ev), std::move(w), false);
}

TEST(Envelope, FixedPointOnNondecreasing) {
  WeightFn g = weight_n();
  WeightFn e = monotone_envelope(g);
  for (Int n : {Int(1), Int(2), Int(17), Int(1000)}) {
    Ival ge = eval_refined(e.at(n, cfg()), 64, cfg(), "env");
    ASSERT_TRUE(ge.exact());
    EXPECT_EQ(ge.lo, Rat(n));
  }
}

TEST(Envelope, OddEvenExample) {
  WeightFn e = monotone_envelope(odd_even_weight());
  for (long n = 1; n <= 40; ++n) {
    Ival v = eval_refined(e.at(Int(n), cfg()), 64, cfg(), "env");
    ASSERT_TRUE(v.exact());
    EXPECT_EQ(v.lo, Rat(n % 2 == 1 ? n : n + 1)) << n;
  }
}

TEST(Envelope, BlockWeightExample) {
  // g(n) = 16 on (2,16], n otherwise; envelope keeps 16 on the block
  WeightFn::Evaluator ev = [](const Int& n, unsigned, const Config&) {
    return Ival(Rat(n > 2 && n <= 16 ? Int(16) : n));
  };
  WeightFn::Witness w = [](const Rat& T, const Config&) {
    Int c = ceil_rat(T);
    return c < 1 ? Int(1) : c;
  };
  WeightFn g("test-block", std::move(ev), std::move(w), false);
  WeightFn e = monotone_envelope(g);
  EXPECT_EQ(eval_refined(e.at(Int(3), cfg()), 64, cfg(), "env").lo, Rat(16));
  EXPECT_EQ(eval_refined(e.at(Int(2), cfg()), 64, cfg(), "env").lo, Rat(2));
  EXPECT_EQ(eval_refined(e.at(Int(1), cfg()), 64, cfg(), "env").lo, Rat(1));
  EXPECT_EQ(eval_refined(e.at(Int(17), cfg()), 64, cfg(), "env").lo, Rat(17));
}

TEST(Envelope, IdempotentAndDominated) {
  WeightFn g = odd_even_weight();
  WeightFn e1 = monotone_envelope(g);
  WeightFn e2 = monotone_envelope(e1);
  Rat prev(-1);
  for (long n = 1; n <= 30; ++n) {
    Ival a = eval_refined(e1.at(Int(n), cfg()), 64, cfg(), "env");
    Ival b = eval_refined(e2.at(Int(n), cfg()), 64, cfg(), "env");
    Ival orig = eval_refined(g.at(Int(n), cfg()), 64, cfg(), "g");
    EXPECT_EQ(a.lo, b.lo);
    EXPECT_LE(a.lo, orig.lo);
    EXPECT_GE(a.lo, prev);  // non-decreasing
    prev = a.lo;
  }
}

TEST(WeightShape, BuiltinsMeetBound) {
  for (const WeightFn& g : {weight_n(), weight_sqrt(), weight_log1p()}) {
    auto rep = weight_shape_report(g, 4);
    EXPECT_TRUE(rep.all_decades_pass()) << g.dsl();
    EXPECT_TRUE(rep.diverges_evidence) << g.dsl();
  }
}

TEST(WeightShape, WitnessSatisfiesBound) {
  for (const WeightFn& g : {weight_n(), weight_sqrt(), weight_log1p(), weight_pow(2, 3)}) {
    for (Rat T : {Rat(5), Rat(100), Rat(12345, 7)}) {
      Int N = g.divergence_witness(T, cfg());
      EXPECT_NE(certified_order(g.at(N, cfg()), T, cfg(), "witness"), Ord::lt) << g.dsl();
      EXPECT_NE(certified_order(g.at(N + 17, cfg()), T, cfg(), "witness tail"), Ord::lt);
    }
  }
}

}  // namespace
