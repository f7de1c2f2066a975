#pragma once

// Explicit constants S, E, P for the point-count bounds, the reference table
// of E(ell, p, 1), P(ell, 1), P(ell, 2), point bounds, claim verification in
// exact / interval arithmetic, moment bounds and an asymptotics probe.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "supertwist/numeric.hpp"

namespace supertwist {

enum class ExponentMode { Tabulated, Displayed };

inline const char* to_string(ExponentMode m) { return m == ExponentMode::Tabulated ? "tabulated" : "displayed"; }

inline void check_constants_query(u64 ell, u64 p) {
  std::vector<std::string> errs;
  if (ell < 5 || !is_prime_u64(ell)) errs.push_back("ell must be a prime >= 5 (got " + std::to_string(ell) + ")");
  if (!is_prime_u64(p)) errs.push_back("p must be prime (got " + std::to_string(p) + ")");
  if (p == 2 || p == 3) errs.push_back("p must not be 2 or 3");
  if (p == ell) errs.push_back("p must differ from ell");
  if (!errs.empty()) {
    std::string msg;
    for (const auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
    throw std::invalid_argument(msg);
  }
}

inline BigInt factorial(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

/// S(ell, p) = 3^{ell-1} p^{3 ell - 3} (8 ell - 10) (ell - 1)!
inline BigInt S_const(u64 ell, u64 p) {
  check_constants_query(ell, p);
  const unsigned l = static_cast<unsigned>(ell);
  return big_pow(3, l - 1) * big_pow(BigInt(p), 3 * l - 3) * BigInt(8 * ell - 10) * factorial(l - 1);
}

/// p^{(ell-1) r} S(ell, p)
inline BigInt point_bound(unsigned r, u64 ell, u64 p) {
  return big_pow(BigInt(p), (static_cast<unsigned>(ell) - 1) * r) * S_const(ell, p);
}

// ---------------------------------------------------------------------------
// Series

template <class Real>
Real normalizer(u64 ell) {
  Real n = 1, x = 1;
  const Real inv = Real(1) / Real(ell);
  for (int j = 1; j < 100000; ++j) {
    x *= inv;
    n /= (1 + x);
    if (x < std::numeric_limits<Real>::epsilon()) break;
  }
  return n;
}

template <class Real>
struct SeriesValue {
  Real value;
  Real even_sum;
  Real odd_sum;
  Real normalizer;
  int terms = 0;
  Real remainder_bound;  // bound on the dropped tail of either sum
  ExponentMode mode = ExponentMode::Tabulated;
};

namespace detail {

template <class Real>
Real exponent_base(u64 ell, u64 p, unsigned m, ExponentMode mode) {
  const unsigned e = mode == ExponentMode::Tabulated ? m : (static_cast<unsigned>(ell) - 1) * m;
  return pow(Real(p), e);
}

// Partial sums of prod_{j<=k} ell X / (ell^j - 1) by parity of k; terms stop
// once they are decreasing and below rel_tol of the running sum.
template <class Real>
void parity_sums(u64 ell, const Real& X, Real& even, Real& odd, int& terms, Real& remainder, double rel_tol) {
  even = 1;
  odd = 0;
  Real term = 1, lj = 1;
  const Real lx = Real(ell) * X;
  for (int k = 1; k < 100000; ++k) {
    lj *= Real(ell);
    const Real ratio = lx / (lj - 1);
    term *= ratio;
    (k % 2 == 0 ? even : odd) += term;
    terms = k;
    if (ratio < Real(0.5)) {
      const Real next_ratio = lx / (lj * Real(ell) - 1);
      // remaining terms shrink at least geometrically with next_ratio
      const Real rem = term * next_ratio / (1 - next_ratio);
      const Real smaller = even < odd ? even : odd;
      if (rem < Real(rel_tol) * (smaller > 0 ? smaller : Real(1))) {
        remainder = rem;
        return;
      }
    }
  }
  throw std::runtime_error("series did not converge");
}

}  // namespace detail

/// E(ell, p, m) = N * max(even sum, odd sum) of prod_{j<=k} ell X/(ell^j - 1).
template <class Real = HighPrec>
SeriesValue<Real> E_const(u64 ell, u64 p, unsigned m, ExponentMode mode = ExponentMode::Tabulated,
                          double rel_tol = 1e-15) {
  check_constants_query(ell, p);
  if (m < 1) throw std::invalid_argument("E: m must be >= 1");
  SeriesValue<Real> s;
  s.mode = mode;
  s.normalizer = normalizer<Real>(ell);
  detail::parity_sums<Real>(ell, detail::exponent_base<Real>(ell, p, m, mode), s.even_sum, s.odd_sum, s.terms,
                            s.remainder_bound, rel_tol);
  s.value = s.normalizer * (s.even_sum > s.odd_sum ? s.even_sum : s.odd_sum);
  return s;
}

/// rho-weighted variant: N [rho * even + (1 - rho) * odd].
template <class Real = HighPrec>
Real E_C(u64 ell, u64 p, unsigned m, double rho, ExponentMode mode = ExponentMode::Tabulated) {
  if (!(rho >= 0 && rho <= 1)) throw std::invalid_argument("E_C: rho must lie in [0,1]");
  auto s = E_const<Real>(ell, p, m, mode);
  return s.normalizer * (Real(rho) * s.even_sum + Real(1 - rho) * s.odd_sum);
}

template <class Real>
void bounded_parity_sums(u64 ell, unsigned m, Real& even, Real& odd) {
  even = 1;
  odd = 0;
  Real term = 1, lj = 1;
  for (unsigned k = 1; k <= m; ++k) {
    lj *= Real(ell);
    term *= Real(ell) / (lj - 1);
    (k % 2 == 0 ? even : odd) += term;
  }
}

/// P(ell, m) = N * min(sum over even k <= m, sum over odd k <= m).
template <class Real = HighPrec>
Real P_const(u64 ell, unsigned m) {
  if (ell < 5 || !is_prime_u64(ell)) throw std::invalid_argument("P: ell must be a prime >= 5");
  if (m < 1) throw std::invalid_argument("P: m must be >= 1");
  Real even, odd;
  bounded_parity_sums(ell, m, even, odd);
  return normalizer<Real>(ell) * (even < odd ? even : odd);
}

/// rho-weighted variant: N [rho * even + (1 - rho) * odd] over k <= m.
template <class Real = HighPrec>
Real P_C(u64 ell, unsigned m, double rho) {
  if (!(rho >= 0 && rho <= 1)) throw std::invalid_argument("P_C: rho must lie in [0,1]");
  Real even, odd;
  bounded_parity_sums(ell, m, even, odd);
  return normalizer<Real>(ell) * (Real(rho) * even + Real(1 - rho) * odd);
}

// ---------------------------------------------------------------------------
// Reference table

struct Table1Cell {
  std::string quantity;  // "E" (with p), "P1", "P2"
  u64 ell = 0;
  u64 p = 0;             // 0 for P rows
  bool omitted = false;  // ell == p
  double value = 0;
  double reference = 0;
  bool within_tolerance = true;
};

inline constexpr std::array<u64, 5> kTablePrimes{5, 7, 11, 13, 17};

/// Reference values; E rows by p, columns by ell (0 marks ell == p).
inline double table1_reference_E(u64 p, u64 ell) {
  static const double ref[5][5] = {
      {0, 5.35713, 5.09091, 5.05494, 5.02451},
      {11.07690, 0, 7.25454, 7.15385, 7.06863},
      {26.76903, 18.57500, 0, 11.60440, 11.26961},
      {37.61501, 25.67499, 16.40459, 0, 13.44608},
      {66.07605, 43.59997, 27.42754, 23.29292, 0},
  };
  auto idx = [](u64 v) {
    for (size_t i = 0; i < kTablePrimes.size(); ++i)
      if (kTablePrimes[i] == v) return i;
    throw std::invalid_argument("not a table prime");
  };
  return ref[idx(p)][idx(ell)];
}

inline double table1_reference_P(u64 ell, unsigned m) {
  static const double p1[5] = {0.79334, 0.85459, 0.90840, 0.92265, 0.94098};
  static const double p2[5] = {0.99167, 0.99702, 0.99924, 0.99954, 0.99980};
  for (size_t i = 0; i < kTablePrimes.size(); ++i)
    if (kTablePrimes[i] == ell) return m == 1 ? p1[i] : p2[i];
  throw std::invalid_argument("not a table prime");
}

inline constexpr double kTableTolerance = 5e-5;

/// 25 E cells (5 omitted) followed by 10 P cells.
inline std::vector<Table1Cell> table1() {
  std::vector<Table1Cell> cells;
  for (u64 p : kTablePrimes) {
    for (u64 ell : kTablePrimes) {
      Table1Cell c;
      c.quantity = "E";
      c.ell = ell;
      c.p = p;
      if (ell == p) {
        c.omitted = true;
      } else {
        c.value = static_cast<double>(E_const<HighPrec>(ell, p, 1).value);
        c.reference = table1_reference_E(p, ell);
        c.within_tolerance = std::fabs(c.value - c.reference) <= kTableTolerance;
      }
      cells.push_back(c);
    }
  }
  for (unsigned m : {1u, 2u}) {
    for (u64 ell : kTablePrimes) {
      Table1Cell c;
      c.quantity = m == 1 ? "P1" : "P2";
      c.ell = ell;
      c.value = static_cast<double>(P_const<HighPrec>(ell, m));
      c.reference = table1_reference_P(ell, m);
      c.within_tolerance = std::fabs(c.value - c.reference) <= kTableTolerance;
      cells.push_back(c);
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Claims

/// Rigorous rational enclosure of prod_{j>=1} (1 + ell^{-j})^{-1}.
struct RationalInterval {
  Rational lo, hi;
};

inline RationalInterval normalizer_interval(u64 ell, unsigned J = 40) {
  Rational hi = 1;
  BigInt lj = 1;
  for (unsigned j = 1; j <= J; ++j) {
    lj *= ell;
    hi *= Rational(lj) / Rational(lj + 1);
  }
  // prod_{j>J} (1 + x_j)^{-1} >= 1 - sum_{j>J} ell^{-j} = 1 - ell^{-J}/(ell - 1)
  Rational lo = hi * (1 - Rational(1) / (Rational(lj) * Rational(ell - 1)));
  return {lo, hi};
}

/// prod_{j<=k} ell/(ell^j - 1), exact.
inline Rational pr_product_exact(u64 ell, unsigned k) {
  Rational w = 1;
  BigInt lj = 1;
  for (unsigned j = 1; j <= k; ++j) {
    lj *= ell;
    w *= Rational(BigInt(ell)) / Rational(lj - 1);
  }
  return w;
}

struct ClaimRow {
  std::string id;
  std::string inputs;
  std::string left;
  std::string right;
  bool pass = false;
};

struct ClaimReport {
  u64 ell = 0, p = 0;
  int k_max = 0;
  int rank_offset = 0;
  std::vector<ClaimRow> rows;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string dec(const Rational& x, int digits = 17) {
  HigherPrec v = HigherPrec(numerator(x)) / HigherPrec(denominator(x));
  return v.str(digits, std::ios_base::scientific);
}

inline std::string big_summary(const BigInt& x) {
  std::string s = x.str();
  if (s.size() <= 24) return s;
  return s.substr(0, 1) + "." + s.substr(1, 8) + "e" + std::to_string(s.size() - 1);
}

}  // namespace detail

/// Upper bound on the mass of ranks > c under the parity-weighted law
/// concentrated on one parity class (1 - N_lo * sum_{r<=c, r in class} w(r)).
inline Rational parity_tail_upper(u64 ell, unsigned c, int parity_class, const RationalInterval& N) {
  Rational kept = 0;
  for (unsigned r = static_cast<unsigned>(parity_class); r <= c; r += 2) kept += pr_product_exact(ell, r);
  return 1 - N.lo * kept;
}

/// Checks (a) p^{2(ell-1)} S <= (3p)^{5 ell} ell!, (b) P(ell, 2) > 0.99 and for
/// k = 1..k_max (c) p^{c(ell-1)} S <= (3p)^{(3+k) ell} ell! together with the
/// worst-parity tail over ranks > c being < 2 ell^{-k(k+1)/2}, where
/// c = k + rank_offset. rank_offset = 0 pairs the threshold with rank k.
inline ClaimReport verify_claims(u64 ell, u64 p, int k_max, int rank_offset = 0) {
  check_constants_query(ell, p);
  if (k_max < 1) throw std::invalid_argument("verify_claims: k_max must be >= 1");
  if (rank_offset < 0) throw std::invalid_argument("verify_claims: rank_offset must be >= 0");
  ClaimReport rep;
  rep.ell = ell;
  rep.p = p;
  rep.k_max = k_max;
  rep.rank_offset = rank_offset;
  const unsigned l = static_cast<unsigned>(ell);
  const BigInt S = S_const(ell, p);
  const BigInt lfact = factorial(l);
  const std::string in = "ell=" + std::to_string(ell) + ",p=" + std::to_string(p);

  {
    BigInt lhs = big_pow(BigInt(p), 2 * (l - 1)) * S;
    BigInt rhs = big_pow(BigInt(3 * p), 5 * l) * lfact;
    rep.rows.push_back({"a", in, detail::big_summary(lhs), detail::big_summary(rhs), lhs <= rhs});
  }
  const RationalInterval N = normalizer_interval(ell);
  {
    Rational even = 1 + pr_product_exact(ell, 2);
    Rational odd = pr_product_exact(ell, 1);
    Rational lower = N.lo * (even < odd ? even : odd);  // rounded toward failure
    rep.rows.push_back({"b", in, detail::dec(lower), "0.99", lower > rat(99, 100)});
  }
  for (int k = 1; k <= k_max; ++k) {
    const unsigned c = static_cast<unsigned>(k + rank_offset);
    const std::string ink = in + ",k=" + std::to_string(k) + ",cutoff=" + std::to_string(c);
    BigInt lhs = big_pow(BigInt(p), c * (l - 1)) * S;
    BigInt rhs = big_pow(BigInt(3 * p), (3 + static_cast<unsigned>(k)) * l) * lfact;
    rep.rows.push_back({"c.points", ink, detail::big_summary(lhs), detail::big_summary(rhs), lhs <= rhs});
    Rational t0 = parity_tail_upper(ell, c, 0, N), t1 = parity_tail_upper(ell, c, 1, N);
    Rational worst = t0 > t1 ? t0 : t1;
    Rational bound = Rational(2) / Rational(big_pow(BigInt(ell), static_cast<unsigned>(k * (k + 1) / 2)));
    rep.rows.push_back({"c.tail", ink, detail::dec(worst), detail::dec(bound), worst < bound});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Moments and asymptotics

struct MomentBound {
  HighPrec log_value;       // log(E * S^m), natural log
  HigherPrec direct_value;  // E * S^m evaluated directly
  bool fits_double = true;
};

inline MomentBound moment_bound(u64 ell, u64 p, unsigned m, ExponentMode mode = ExponentMode::Tabulated) {
  auto E = E_const<HigherPrec>(ell, p, m, mode);
  const BigInt S = S_const(ell, p);
  MomentBound b;
  b.log_value = HighPrec(log(E.value) + HigherPrec(m) * log(HigherPrec(S)));
  b.direct_value = E.value * pow(HigherPrec(S), m);
  b.fits_double = b.log_value < HighPrec(std::log(std::numeric_limits<double>::max()));
  return b;
}

struct AsymptoticsRow {
  u64 ell;
  double E;
  double e_scaled;   // (E - p) * ell
  double p1_scaled;  // (1 - P(ell,1)) * ell
  double p2_scaled;  // (1 - P(ell,2)) * ell^3
};

inline std::vector<AsymptoticsRow> asymptotics_probe(u64 p, const std::vector<u64>& ells) {
  std::vector<AsymptoticsRow> rows;
  for (u64 ell : ells) {
    if (ell == p) continue;
    double E = static_cast<double>(E_const<HighPrec>(ell, p, 1).value);
    const double L = static_cast<double>(ell);
    rows.push_back({ell, E, (E - static_cast<double>(p)) * L, (1 - static_cast<double>(P_const<HighPrec>(ell, 1))) * L,
                    (1 - static_cast<double>(P_const<HighPrec>(ell, 2))) * L * L * L});
  }
  return rows;
}

}  // namespace supertwist
