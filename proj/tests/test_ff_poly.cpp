#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "supertwist/ff_poly.hpp"

using namespace supertwist;

namespace {

FieldPtr F9() { return Field::make(FieldSpec{3, 2, {1, 0, 1}}); }  // t^2 + 1 over F_3

Poly random_poly(const FieldPtr& f, int deg, RandomStream& rng) {
  std::vector<u64> c(static_cast<size_t>(deg) + 1);
  for (auto& x : c) x = rng.uniform(f->q());
  if (c.back() == 0) c.back() = 1;
  return Poly(f, c);
}

}  // namespace

TEST(Field, PrimeFieldInversesAndSquares) {
  auto f = Field::prime(11);
  std::set<u64> squares;
  for (u64 x = 1; x < 11; ++x) squares.insert(x * x % 11);
  for (u64 a = 1; a < 11; ++a) {
    EXPECT_EQ(a * f->inv(a) % 11, 1u);
    EXPECT_EQ(f->is_square(a), squares.count(a) == 1) << a;
  }
  EXPECT_EQ(f->from_int(-1), 10u);
  EXPECT_EQ(f->pow(2, 10), 1u);
}

TEST(Field, ExtensionFieldAxiomsExhaustive) {
  auto f = F9();
  ASSERT_EQ(f->q(), 9u);
  for (u64 a = 0; a < 9; ++a) {
    EXPECT_EQ(f->add(a, f->neg(a)), 0u);
    if (a) {
      EXPECT_EQ(f->mul(a, f->inv(a)), 1u);
    }
    for (u64 b = 0; b < 9; ++b) {
      EXPECT_EQ(f->mul(a, b), f->mul(b, a));
      for (u64 c = 0; c < 9; ++c) {
        EXPECT_EQ(f->mul(f->mul(a, b), c), f->mul(a, f->mul(b, c)));
        EXPECT_EQ(f->mul(a, f->add(b, c)), f->add(f->mul(a, b), f->mul(a, c)));
      }
    }
  }
  // t * t = -1
  EXPECT_EQ(f->mul(3, 3), 2u);
  const u64 g = f->primitive_root();
  std::set<u64> seen;
  for (u64 k = 0, x = 1; k < 8; ++k, x = f->mul(x, g)) seen.insert(x);
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Field, ElementWrapperChecksField) {
  auto f = Field::prime(7), g = Field::prime(5);
  auto a = FieldElem::from_int(f, 3), b = FieldElem::from_int(f, 5);
  EXPECT_EQ(field_arith(a, b, ArithOp::Mul).rep(), 1u);
  EXPECT_EQ(field_arith(a, b, ArithOp::Div).rep(), f->mul(3, f->inv(5)));
  EXPECT_THROW(field_arith(a, FieldElem::from_int(g, 1), ArithOp::Add), std::invalid_argument);
  EXPECT_THROW(field_arith(a, FieldElem::from_int(f, 0), ArithOp::Div), std::domain_error);
}

TEST(Poly, DivisionIdentityRandom) {
  auto f = Field::prime(11);
  RandomStream rng(1);
  for (int it = 0; it < 300; ++it) {
    Poly a = random_poly(f, static_cast<int>(rng.uniform(30)), rng);
    Poly b = random_poly(f, static_cast<int>(rng.uniform(12)), rng);
    auto [qt, r] = divmod(a, b);
    EXPECT_EQ(qt * b + r, a);
    EXPECT_LT(r.degree(), b.degree());
  }
  EXPECT_THROW(divmod(Poly::one(f), Poly(f)), std::domain_error);
}

TEST(Poly, GcdIsMonicCommonDivisor) {
  auto f = Field::prime(13);
  RandomStream rng(2);
  for (int it = 0; it < 100; ++it) {
    Poly c = random_poly(f, 1 + static_cast<int>(rng.uniform(5)), rng);
    Poly a = random_poly(f, static_cast<int>(rng.uniform(10)), rng) * c;
    Poly b = random_poly(f, static_cast<int>(rng.uniform(10)), rng) * c;
    Poly g = gcd(a, b);
    EXPECT_TRUE(g.is_monic());
    EXPECT_TRUE((a % g).is_zero());
    EXPECT_TRUE((b % g).is_zero());
    EXPECT_TRUE((g % make_monic(c)).is_zero());
  }
}

TEST(Poly, PowmodMatchesRepeatedMultiplication) {
  auto f = Field::prime(7);
  RandomStream rng(3);
  Poly m = random_poly(f, 6, rng), a = random_poly(f, 8, rng);
  Poly acc = Poly::one(f);
  for (u64 k = 0; k < 40; ++k) {
    EXPECT_EQ(powmod(a, k, m), acc % m);
    EXPECT_EQ(powmod(a, BigInt(k), m), acc % m);
    acc = mulmod(acc, a, m);
  }
}

TEST(Poly, ResultantIsProductOfValuesForSplitModulus) {
  auto f = Field::prime(11);
  RandomStream rng(4);
  for (int it = 0; it < 50; ++it) {
    std::vector<u64> roots;
    Poly v = Poly::one(f);
    for (int i = 0; i < 4; ++i) {
      roots.push_back(rng.uniform(11));
      v = v * Poly(f, {f->neg(roots.back()), 1});
    }
    Poly a = random_poly(f, static_cast<int>(rng.uniform(7)), rng);
    u64 prod = 1;
    for (u64 r : roots) prod = f->mul(prod, eval(a, r));
    EXPECT_EQ(resultant(v, a), prod);
  }
}

TEST(Poly, DerivativeAndEval) {
  auto f = Field::prime(5);
  Poly a = Poly::from_ints(f, {1, 2, 0, 4, 1});  // t^4 + 4t^3 + 2t + 1
  EXPECT_EQ(derivative(a), Poly::from_ints(f, {2, 0, 12, 4}));
  EXPECT_EQ(eval(a, 2), (16 + 32 + 4 + 1) % 5);
  EXPECT_TRUE(derivative(Poly::monomial(f, 1, 5)).is_zero());
}

TEST(Irreducible, CountsMatchTrialDivision) {
  for (u64 p : {2u, 3u, 5u}) {
    auto f = Field::prime(p);
    for (int d = 1; d <= (p == 5 ? 4 : 6); ++d) {
      u64 trial = 0, fast = 0;
      for (const auto& g : oracle::all_monic(f, d)) {
        const bool t = oracle::irreducible_by_trial(g);
        trial += t;
        fast += is_irreducible(g);
        ASSERT_EQ(t, is_irreducible(g)) << g.to_string();
      }
      EXPECT_EQ(BigInt(trial), count_monic_irreducibles(p, d)) << p << " " << d;
      EXPECT_EQ(enumerate_monic(f, d, MonicFilter::Irreducible).size(), trial);
    }
  }
}

TEST(Irreducible, NecklaceIdentity) {
  for (u64 q : {2u, 3u, 4u, 9u, 11u, 121u})
    for (int n = 1; n <= 12; ++n) {
      BigInt s = 0;
      for (int d = 1; d <= n; ++d)
        if (n % d == 0) s += d * count_monic_irreducibles(q, d);
      EXPECT_EQ(s, big_pow(BigInt(q), static_cast<unsigned>(n)));
    }
}

TEST(Factor, ProductOfIrreduciblesReconstructs) {
  RandomStream rng(5);
  for (FieldPtr f : {Field::prime(11), Field::prime(3), F9()}) {
    for (int it = 0; it < 60; ++it) {
      Poly a = random_poly(f, 1 + static_cast<int>(rng.uniform(35)), rng);
      auto fac = factor(a, rng);
      EXPECT_EQ(fac.expand(), a);
      for (size_t i = 0; i < fac.factors.size(); ++i) {
        EXPECT_TRUE(fac.factors[i].first.is_monic());
        if (fac.factors[i].first.degree() <= 6) {
          EXPECT_TRUE(oracle::irreducible_by_trial(fac.factors[i].first));
        }
        EXPECT_TRUE(is_irreducible(fac.factors[i].first));
        if (i) {
          EXPECT_TRUE(canonical_less(fac.factors[i - 1].first, fac.factors[i].first));
        }
      }
    }
  }
}

TEST(Factor, RepeatedAndPthPowerFactors) {
  auto f = Field::prime(3);
  RandomStream rng(6);
  Poly g = Poly::from_ints(f, {1, 0, 1});          // t^2 + 1
  Poly h = Poly::from_ints(f, {2, 1});             // t + 2
  Poly k = Poly::from_ints(f, {1, 2, 0, 1});       // t^3 + 2t + 1
  Poly a = g * g * g * h * h * k;
  auto fac = factor(a, rng);
  std::map<std::string, int> mult;
  for (const auto& [pi, m] : fac.factors) mult[pi.to_string()] = m;
  EXPECT_EQ(mult.size(), 3u);
  EXPECT_EQ(mult[g.to_string()], 3);
  EXPECT_EQ(mult[h.to_string()], 2);
  EXPECT_EQ(mult[k.to_string()], 1);
  EXPECT_EQ(fac.expand(), a);
}

TEST(Factor, DeterministicForFixedSeed) {
  auto f = Field::prime(11);
  RandomStream r0(9);
  Poly a = sample_monic(f, 30, r0);
  RandomStream r1(17), r2(17);
  auto x = factor(a, r1), y = factor(a, r2);
  ASSERT_EQ(x.factors.size(), y.factors.size());
  for (size_t i = 0; i < x.factors.size(); ++i) EXPECT_EQ(x.factors[i].first, y.factors[i].first);
}

TEST(Enumerate, BudgetGuard) {
  auto f = Field::prime(11);
  EXPECT_THROW(enumerate_monic(f, 8, MonicFilter::All), BudgetExceeded);
  EXPECT_EQ(enumerate_monic(f, 2, MonicFilter::All).size(), 121u);
  EXPECT_THROW(enumerate_monic(f, 3, MonicFilter::All, 100), BudgetExceeded);
}

TEST(Enumerate, RangesPartitionTheDegree) {
  auto f = Field::prime(5);
  std::set<std::string> all;
  for (u64 b = 0; b < 625; b += 100)
    for_each_monic_in_range(f, 4, b, std::min<u64>(b + 100, 625), MonicFilter::All,
                            [&](const Poly& g) { all.insert(g.to_string()); });
  EXPECT_EQ(all.size(), 625u);
}

TEST(Sample, MonicOfRequestedDegree) {
  auto f = Field::prime(11);
  RandomStream a(1), b(1);
  for (int i = 0; i < 20; ++i) {
    Poly x = sample_monic(f, 30, a), y = sample_monic(f, 30, b);
    EXPECT_EQ(x, y);
    EXPECT_EQ(x.degree(), 30);
    EXPECT_TRUE(x.is_monic());
  }
}

TEST(Cubic, DiscriminantOfDepressedCubic) {
  auto f = Field::prime(11);
  RandomStream rng(7);
  for (int it = 0; it < 30; ++it) {
    Poly a = random_poly(f, static_cast<int>(rng.uniform(4)), rng);
    Poly b = random_poly(f, static_cast<int>(rng.uniform(4)), rng);
    Poly expect = scale(a * a * a, f->from_int(-4)) - scale(b * b, f->from_int(27));
    EXPECT_EQ(discriminant_cubic(make_cubic(b, a, Poly(f))), expect);
  }
}

TEST(Cubic, DiscriminantIsProductOfRootDifferences) {
  auto f = Field::prime(13);
  // (x - r1)(x - r2)(x - r3) with constant roots
  for (u64 r1 = 0; r1 < 13; r1 += 3)
    for (u64 r2 = 1; r2 < 13; r2 += 4)
      for (u64 r3 = 2; r3 < 13; r3 += 5) {
        const u64 s1 = f->add(f->add(r1, r2), r3);
        const u64 s2 = f->add(f->add(f->mul(r1, r2), f->mul(r1, r3)), f->mul(r2, r3));
        const u64 s3 = f->mul(f->mul(r1, r2), r3);
        CubicX F = make_cubic(Poly::constant(f, f->neg(s3)), Poly::constant(f, s2), Poly::constant(f, f->neg(s1)));
        u64 d = f->mul(f->mul(f->sub(r1, r2), f->sub(r1, r3)), f->sub(r2, r3));
        EXPECT_EQ(discriminant_cubic(F), Poly::constant(f, f->mul(d, d)));
      }
}
