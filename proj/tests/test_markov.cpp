#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "supertwist/markov.hpp"

using namespace supertwist;

namespace {

Rational row_sum(const std::vector<std::pair<int, Rational>>& row) {
  Rational s = 0;
  for (const auto& [r, p] : row) s += p;
  return s;
}

// Second largest eigenvalue of the operator on one parity class of {0..R}.
// The chain is reversible for pi(r+1)/pi(r) = ell^{-r} / (1 - ell^{-r-1}), so
// D^{1/2} M D^{-1/2} is symmetric and a self-adjoint solver applies.
double second_eigenvalue(const MarkovOp& op, int parity, int R) {
  const double L = static_cast<double>(op.ell());
  std::vector<double> logpi(static_cast<size_t>(R) + 1, 0.0);
  for (int r = 0; r < R; ++r)
    logpi[static_cast<size_t>(r) + 1] = logpi[static_cast<size_t>(r)] - r * std::log(L) - std::log1p(-std::pow(L, -r - 1));
  std::vector<int> states;
  for (int r = parity; r <= R; r += 2) states.push_back(r);
  const int n = static_cast<int>(states.size());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int r = states[static_cast<size_t>(i)];
    for (const auto& [s, p] : op.transitions_exact(r))
      if (s <= R)
        S(i, (s - parity) / 2) +=
            static_cast<double>(p) * std::exp(0.5 * (logpi[static_cast<size_t>(r)] - logpi[static_cast<size_t>(s)]));
  }
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues();
  return ev(n - 2);
}

}  // namespace

TEST(Operator, RowsSumToOneExactly) {
  for (u64 ell : {5u, 7u})
    for (const MarkovOp& op : {MarkovOp::m_ell(ell, 70), MarkovOp::m_ell_squared(ell, 70), MarkovOp::m_T(ell, 70)})
      for (int r = 0; r <= 64; ++r) EXPECT_EQ(row_sum(op.transitions_exact(r)), 1) << ell << " " << r;
}

TEST(Operator, TwistOperatorMovesByEvenSteps) {
  for (u64 ell : {5u, 7u}) {
    auto op = MarkovOp::m_T(ell, 60);
    EXPECT_TRUE(op.parity_preserving());
    EXPECT_FALSE(MarkovOp::m_ell(ell, 60).parity_preserving());
    for (int r = 0; r <= 60; ++r)
      for (const auto& [s, p] : op.transitions_exact(r)) EXPECT_EQ((s - r) % 2, 0);
  }
}

TEST(Operator, TwoStepIsSquareOfOneStep) {
  auto op = MarkovOp::m_ell(7, 40);
  for (int r = 0; r <= 30; ++r) {
    std::map<int, Rational> comp;
    for (const auto& [s, p] : op.one_step(r))
      for (const auto& [u, q] : op.one_step(s)) comp[u] += p * q;
    std::map<int, Rational> two;
    for (const auto& [s, p] : op.two_step(r)) two[s] += p;
    for (auto it = comp.begin(); it != comp.end();)
      it = it->second == 0 ? comp.erase(it) : std::next(it);
    EXPECT_EQ(comp, two) << r;
  }
}

TEST(Operator, ExactApplicationConservesMassAndParity) {
  auto op = MarkovOp::m_T(5, 40);
  for (int r0 : {0, 1, 4}) {
    ExactDist d{{r0, Rational(1)}};
    auto e = apply_exact(op, d, 12);
    EXPECT_EQ(exact_total(e), 1);
    EXPECT_EQ(exact_parity(e), Rational(r0 % 2));
  }
  auto m = MarkovOp::m_ell(5, 40);
  auto e = apply_exact(m, ExactDist{{0, Rational(1)}}, 1);
  EXPECT_EQ(exact_parity(e), 1);
}

TEST(Operator, RejectsBadWeights) {
  EXPECT_THROW(MarkovOp(5, rat(1, 2), rat(1, 3), 0, 10), std::invalid_argument);
  EXPECT_THROW(MarkovOp(5, rat(3, 2), rat(-1, 2), 0, 10), std::invalid_argument);
  EXPECT_THROW(MarkovOp(5, 1, 0, 0, 1), std::invalid_argument);
}

TEST(Operator, TailRouting) {
  auto a = MarkovOp::m_ell(5, 10), b = MarkovOp::m_ell(5, 10, TailPolicy::StickyTop);
  EXPECT_EQ(a.route(11), 9);
  EXPECT_EQ(a.route(12), 10);
  EXPECT_EQ(b.route(11), 10);
  EXPECT_EQ(a.route(7), 7);
}

TEST(Operator, ApplyRefusesLeakingMass) {
  auto op = MarkovOp::m_ell(5, 2);
  EXPECT_THROW(apply(op, RankDist::point(2, 2), 1), std::domain_error);
  auto big = MarkovOp::m_ell(5, 30);
  EXPECT_NO_THROW(apply(big, RankDist::point(0, 30), 50));
}

TEST(Stationary, PoonenRainsDetailedBalance) {
  for (u64 ell : {5u, 7u, 11u}) {
    auto pr = pr_distribution(ell, 40);
    EXPECT_NEAR(pr.total(), 1.0, 1e-14);
    EXPECT_NEAR(parity(pr), 0.5, 1e-14);
    const double L = static_cast<double>(ell);
    for (int r = 0; r + 1 <= 12; ++r) {
      const double up = std::pow(L, -r), down = 1 - std::pow(L, -(r + 1));
      EXPECT_NEAR(pr.probs[static_cast<size_t>(r)] * up, pr.probs[static_cast<size_t>(r) + 1] * down,
                  1e-15 * pr.probs[static_cast<size_t>(r)]);
    }
    EXPECT_LT(fixed_point_residual(MarkovOp::m_ell(ell, 40), pr), 1e-15);
  }
}

TEST(Stationary, ParityWeightedLawIsFixedByTwistOperator) {
  for (u64 ell : {5u, 7u})
    for (double rho : {0.0, 0.3, 1.0}) {
      auto pw = parity_weighted_pr(ell, rho, 60);
      EXPECT_NEAR(pw.total(), 1.0, 1e-14);
      EXPECT_NEAR(parity(pw), rho, 1e-14);
      EXPECT_LT(fixed_point_residual(MarkovOp::m_T(ell, 60), pw), 1e-10);
    }
}

TEST(Stationary, TotalVariationProperties) {
  auto a = pr_distribution(5, 30), b = parity_weighted_pr(5, 0.0, 30);
  EXPECT_DOUBLE_EQ(total_variation(a, a), 0.0);
  EXPECT_DOUBLE_EQ(total_variation(a, b), total_variation(b, a));
  EXPECT_NEAR(total_variation(parity_weighted_pr(5, 0.0, 30), parity_weighted_pr(5, 1.0, 30)), 1.0, 1e-14);
}

TEST(Gamma, MatchesDenseEigenvalueOracle) {
  for (u64 ell : {5u, 7u}) {
    auto op = MarkovOp::m_T(ell, 60);
    auto g = estimate_gamma(op);
    const double oracle = std::max(second_eigenvalue(op, 0, 24), second_eigenvalue(op, 1, 24));
    EXPECT_NEAR(g.gamma, oracle, 1e-8) << ell;
    EXPECT_NEAR(g.fitted, g.power, 0.1 * g.power);
    EXPECT_EQ(g.per_class.size(), 2u);
  }
}

TEST(Gamma, BoundsTotalVariationDecay) {
  for (u64 ell : {5u, 7u}) {
    auto op = MarkovOp::m_T(ell, 60);
    const double g = estimate_gamma(op).gamma;
    for (int r0 = 0; r0 <= 6; ++r0) {
      const auto target = parity_weighted_pr(ell, r0 % 2, 60);
      RankDist cur = RankDist::point(r0, 60);
      // reversible chain: TV <= sqrt((1 - pi(r0)) / pi(r0)) / 2 * gamma^n on the class of r0
      const double pi0 = target.probs[static_cast<size_t>(r0)];
      const double C = 0.5 * std::sqrt((1 - pi0) / pi0);
      for (int n = 1; n <= 200; ++n) {
        cur = apply(op, cur, 1);
        const double tv = total_variation(cur, target);
        if (tv < 1e-13) break;
        EXPECT_LE(tv, C * std::pow(g, n) * (1 + 1e-9)) << ell << " " << r0 << " " << n;
      }
    }
  }
}

TEST(Gamma, GrowsWithLazyWeight) {
  double prev = 0;
  for (auto w : {rat(1, 2), rat(2, 3), rat(5, 6), rat(9, 10)}) {
    MarkovOp op(5, w, 0, 1 - w, 60);
    const double g = estimate_gamma(op, 1e-2).gamma;
    EXPECT_NEAR(g, second_eigenvalue(op, 0, 24), 1e-8);
    EXPECT_GT(g, prev);
    EXPECT_LT(g, 1.0);
    prev = g;
  }
}

TEST(Gamma, MixingOperatorHasSingleClass) {
  auto g = estimate_gamma(MarkovOp(5, rat(1, 2), rat(1, 2), 0, 40), 1e-2);
  EXPECT_EQ(g.per_class.size(), 1u);
  EXPECT_THROW(estimate_gamma(MarkovOp(5, 1, 0, 0, 40)), std::invalid_argument);
  EXPECT_THROW(estimate_gamma(MarkovOp::m_T(5, 10)), std::invalid_argument);
}

TEST(Alpha, MatchesGridSearch) {
  for (double gamma : {0.5, 0.84, 0.95})
    for (double d0 : {0.5, 5.0 / 6.0}) {
      const double lg = -std::log(gamma), ld = -std::log(1 - d0);
      double best = 0;
      for (int i = 1; i < 200000; ++i) {
        const double r = i / 200000.0;
        best = std::max(best, std::min({r * std::log(r) + 1 - r, r * lg, r * ld}));
      }
      EXPECT_NEAR(alpha_exponent(gamma, d0), best, 1e-6);
      EXPECT_EQ(alpha_exponent(gamma, d0, AlphaSign::Literal), 0.0);
    }
  EXPECT_THROW(alpha_exponent(1.0, 0.5), std::invalid_argument);
}

TEST(DTable, RowsSumToOneExactly) {
  for (u64 ell : {5u, 7u})
    for (int r = 0; r <= 64; ++r)
      for (PlaceClass c : {PlaceClass::P0, PlaceClass::P1, PlaceClass::P2}) {
        Rational s = 0;
        for (const auto& [j, p] : dtable(ell, r, c)) s += p;
        EXPECT_EQ(s, 1);
      }
  EXPECT_THROW(dtable(5, 1, PlaceClass::Ramified), std::invalid_argument);
}

TEST(DTable, DiffersFromTwoStepOnlyAtZeroAndPlusTwo) {
  for (u64 ell : {5u, 7u}) {
    auto rows = compare_dtable_vs_two_step(ell, 64);
    ASSERT_EQ(rows.size(), 65u * 3);
    for (const auto& row : rows) {
      if (row.j == -2)
        EXPECT_EQ(row.diff, 0) << row.r;
      else
        EXPECT_NE(row.diff, 0) << row.r << " " << row.j;
    }
  }
}
