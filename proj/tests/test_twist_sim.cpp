#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "supertwist/twist_sim.hpp"

using namespace supertwist;

namespace {

CurveConfig example_curve() {
  auto f = Field::prime(11);
  return validate_config(5, f, Poly::from_ints(f, {0, 1}), Poly::from_ints(f, {0, 1}), Poly(f));
}

SimConfig small_config(u64 samples, u64 seed) {
  SimConfig c(example_curve());
  c.n = 12;
  c.samples = samples;
  c.seed = seed;
  return c;
}

// Number of distinct monic irreducible divisors of every monic of degree n, by trial division.
std::vector<BigInt> omega_by_trial(u64 q, int n) {
  auto f = Field::prime(q);
  std::vector<Poly> irr;
  for (int d = 1; d <= n; ++d)
    for (const auto& g : oracle::all_monic(f, d))
      if (oracle::irreducible_by_trial(g)) irr.push_back(g);
  std::vector<BigInt> out(static_cast<size_t>(n) + 1, 0);
  for (const auto& p : oracle::all_monic(f, n)) {
    size_t w = 0;
    for (const auto& g : irr)
      if (g.degree() <= n && (p % g).is_zero()) ++w;
    out[w] += 1;
  }
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

}  // namespace

TEST(Thresholds, Formulas) {
  EXPECT_NEAR(m_nq(100, 11), std::log(100.0) + std::log(std::log(11.0)), 1e-14);
  const double m = std::log(30.0) + std::log(std::log(11.0));
  EXPECT_NEAR(frak_n(30, 11), 4 * m * m / std::log(11.0), 1e-12);
  EXPECT_NEAR(m_nq(std::exp(1.0), std::exp(std::exp(1.0))), 2.0, 1e-14);
  EXPECT_LT(m_nq(10, 11), m_nq(11, 11));
}

TEST(Thresholds, DeviationBoundAgreesWithLongDouble) {
  const long double n = 1e12L, q = 11, rho = 0.3L, d0 = 5.0L / 6;
  const long double m = std::log(n) + std::log(std::log(q));
  const long double eps = 1 / std::log(std::log(m));
  const long double a = std::pow(n, -rho * std::log(rho) - 1 + rho);
  const long double b = 3 * m * m * std::pow(1 - d0, (1 - eps) * rho * m);
  auto got = deviation_bound(1e12, 11, 0.3, 5.0 / 6);
  EXPECT_NEAR(got.ratio, static_cast<double>(4 * std::max(a, b)), 1e-10 * static_cast<double>(4 * std::max(a, b)));
  EXPECT_NEAR(got.m, static_cast<double>(m), 1e-12);
  EXPECT_FALSE(got.threshold_met);
  EXPECT_TRUE(deviation_bound(1e300, 11, 0.3, 5.0 / 6).m > 600);
}

TEST(Thresholds, DeviationBoundRejectsBadInputs) {
  EXPECT_THROW(deviation_bound(2, 11, 0.3, 0.5), std::domain_error);
  EXPECT_THROW(deviation_bound(1e12, 11, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(deviation_bound(1e12, 11, 0.3, 0.0), std::invalid_argument);
}

TEST(Omega, QuadraticsOverF2) {
  // t^2, t^2 + 1, t^2 + t + 1 have one distinct factor; t^2 + t has two
  EXPECT_EQ(omega_distribution(2, 2), (std::vector<BigInt>{0, 3, 1}));
}

TEST(Omega, SumsToNumberOfMonics) {
  for (u64 q : {2u, 3u, 11u})
    for (int n = 1; n <= 12; ++n) {
      BigInt s = 0;
      for (const auto& c : omega_distribution(q, n)) s += c;
      EXPECT_EQ(s, pow(BigInt(q), static_cast<unsigned>(n))) << q << " " << n;
    }
}

TEST(Omega, SingleFactorCountIsPrimePowerCount) {
  for (u64 q : {2u, 3u, 11u})
    for (int n = 1; n <= 12; ++n) {
      BigInt s = 0;
      for (int d = 1; d <= n; ++d)
        if (n % d == 0) s += count_monic_irreducibles(q, d);
      EXPECT_EQ(omega_distribution(q, n).at(1), s);
    }
}

TEST(Omega, MatchesExhaustiveTrialDivision) {
  for (int n = 1; n <= 8; ++n) EXPECT_EQ(omega_distribution(2, n), omega_by_trial(2, n)) << n;
  for (int n = 1; n <= 5; ++n) EXPECT_EQ(omega_distribution(3, n), omega_by_trial(3, n)) << n;
  EXPECT_THROW(omega_distribution(2, 0), std::invalid_argument);
}

TEST(Fhat, Invariants) {
  auto c = example_curve();
  RandomStream rng(5);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform(40));
    Poly f = sample_monic(c.field, n, rng);
    auto s = fhat_census(f, c, rng);
    EXPECT_EQ(s.N, n);
    EXPECT_LE(s.w_prime, s.w);
    EXPECT_GE(s.w, 1);
    if (s.has_large_P0) {
      EXPECT_GE(s.w_prime, 1);
    }
  }
  EXPECT_THROW(fhat_census(Poly(c.field), c, rng), std::invalid_argument);
}

TEST(Walk, P2TransitionMatchesExactRow) {
  const u64 ell = 5;
  auto sq = MarkovOp::m_ell_squared(ell, 20);
  for (TransitionMode mode : {TransitionMode::TwoStep, TransitionMode::DTable})
    for (int r : {0, 1, 2}) {
      std::map<int, double> expect;
      if (mode == TransitionMode::TwoStep)
        for (const auto& [s, p] : sq.two_step(r)) expect[s] += static_cast<double>(p);
      else
        for (const auto& [j, p] : dtable(ell, r, PlaceClass::P2)) expect[r + j] += static_cast<double>(p);
      RandomStream rng(100 + static_cast<u64>(r));
      const int trials = 200000;
      std::map<int, int> seen;
      for (int i = 0; i < trials; ++i) ++seen[p2_transition(r, ell, mode, rng)];
      for (const auto& [s, k] : seen) EXPECT_TRUE(expect.count(s)) << s;
      for (const auto& [s, p] : expect) {
        const double sd = std::sqrt(p * (1 - p) / trials) + 1e-12;
        EXPECT_NEAR(static_cast<double>(seen[s]) / trials, p, 5 * sd) << to_string(mode) << " " << r << "->" << s;
      }
    }
}

TEST(Experiment, WorkerCountDoesNotChangeReport) {
  auto a = small_config(300, 9), b = small_config(300, 9);
  b.workers = 4;
  auto ra = run_experiment(a), rb = run_experiment(b);
  EXPECT_EQ(ra.counts, rb.counts);
  EXPECT_EQ(ra.class_counts, rb.class_counts);
  EXPECT_EQ(ra.p2_histogram, rb.p2_histogram);
  EXPECT_EQ(ra.fhat, rb.fhat);
  EXPECT_EQ(ra.tv, rb.tv);
  EXPECT_EQ(run_experiment(a).counts, ra.counts);
  EXPECT_NE(run_experiment(small_config(300, 10)).counts, ra.counts);
}

TEST(Experiment, ParityIsConserved) {
  for (int r0 : {0, 1})
    for (TransitionMode mode : {TransitionMode::TwoStep, TransitionMode::DTable}) {
      auto c = small_config(200, 3);
      c.mu_star = RankDist::point(r0, 60);
      c.mode = mode;
      c.shuffle = r0 == 1;
      auto rep = run_experiment(c);
      EXPECT_EQ(rep.parity, static_cast<double>(r0));
      EXPECT_EQ(rep.rho0, static_cast<double>(r0));
      for (size_t r = static_cast<size_t>(1 - r0); r < rep.counts.size(); r += 2) EXPECT_EQ(rep.counts[r], 0u);
    }
}

TEST(Experiment, FactorOrderDoesNotChangeTheLaw) {
  auto a = small_config(3000, 21), b = small_config(3000, 22);
  b.shuffle = true;
  auto ra = run_experiment(a), rb = run_experiment(b);
  EXPECT_LT(total_variation(ra.empirical, rb.empirical), 0.05);
}

TEST(Experiment, ReportBookkeeping) {
  auto c = small_config(400, 4);
  auto rep = run_experiment(c);
  EXPECT_EQ(rep.kept, 400u);
  u64 s = 0;
  for (u64 x : rep.counts) s += x;
  EXPECT_EQ(s, 400u);
  s = 0;
  for (u64 x : rep.p2_histogram) s += x;
  EXPECT_EQ(s, 400u);
  u64 f = 0;
  for (const auto& [k, v] : rep.fhat) f += v;
  EXPECT_EQ(f, 400u);
  EXPECT_LE(rep.with_ramified, 400u);
  EXPECT_GT(rep.class_counts[static_cast<size_t>(FrobClass::Ramified)], 0u);
  EXPECT_NEAR(rep.empirical.total(), 1.0, 1e-12);

  c.strict_fhat = true;
  auto strict = run_experiment(c);
  EXPECT_EQ(strict.kept, strict.with_large_P0);
  EXPECT_LE(strict.kept, 400u);
}

TEST(Experiment, PredictedLawForFixedStepCounts) {
  auto c = small_config(1, 0);
  c.mu_star = RankDist::point(2, 30);
  auto none = predicted_law(c, {5});
  EXPECT_EQ(none.probs, c.mu_star.probs);
  auto one = predicted_law(c, {0, 7});
  std::map<int, double> row;
  for (const auto& [s, p] : MarkovOp::m_ell_squared(5, 40).two_step(2)) row[s] += static_cast<double>(p);
  for (int r = 0; r <= 30; ++r) EXPECT_NEAR(one.probs[static_cast<size_t>(r)], row[r], 1e-15);
}

TEST(Experiment, ValidationErrors) {
  auto c = small_config(0, 1);
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.samples = 10;
  c.mu_star.probs[0] = 0.5;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c.mu_star = RankDist::point(0, 60);
  c.workers = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  auto f = Field::prime(11);
  // x^3 - 3x + 1 is not S_3
  SimConfig a3(make_curve(5, f, Poly::one(f), Poly::constant(f, f->from_int(-3)), Poly(f)));
  EXPECT_THROW(run_experiment(a3), ConfigError);
  auto slow = small_config(100000, 1);
  slow.n = 60;
  slow.time_limit_seconds = 1e-9;
  EXPECT_THROW(run_experiment(slow), std::runtime_error);
}
