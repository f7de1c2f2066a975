#pragma once

// Rank-state Markov operators: M_ell, its two-step law, the mixtures
// M_T = d0 I + d1 M_ell + d2 M_ell^2, stationary laws with parity weighting,
// spectral-rate estimation, the printed d-table and the alpha exponent.

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supertwist/numeric.hpp"
#include "supertwist/place_classifier.hpp"

namespace supertwist {

/// Probability vector on {0..R} with explicit tail mass beyond R.
struct RankDist {
  std::vector<double> probs;
  double tail = 0.0;

  int R() const { return static_cast<int>(probs.size()) - 1; }
  double total() const {
    double s = tail;
    for (double p : probs) s += p;
    return s;
  }
  static RankDist point(int r, int R) {
    if (r < 0 || r > R) throw std::invalid_argument("point mass outside state range");
    RankDist d;
    d.probs.assign(static_cast<size_t>(R) + 1, 0.0);
    d.probs[static_cast<size_t>(r)] = 1.0;
    return d;
  }
};

/// Exact law on ranks (untruncated).
using ExactDist = std::map<int, Rational>;

enum class TailPolicy {
  ParityTop,  // overflow goes to R or R-1, whichever has the parity of the target
  StickyTop,  // overflow goes to R
};

class MarkovOp {
 public:
  /// d0 I + d1 M_ell + d2 M_ell^2; weights are exact and must sum to 1.
  MarkovOp(u64 ell, Rational d0, Rational d1, Rational d2, int R, TailPolicy policy = TailPolicy::ParityTop,
           double tail_tolerance = 1e-12)
      : ell_(ell), w_{d0, d1, d2}, R_(R), policy_(policy), tol_(tail_tolerance) {
    if (ell < 2) throw std::invalid_argument("MarkovOp: ell must be >= 2");
    if (R < 2) throw std::invalid_argument("MarkovOp: R must be >= 2");
    for (const auto& w : w_)
      if (w < 0) throw std::invalid_argument("MarkovOp: negative mixture weight");
    if (d0 + d1 + d2 != 1) throw std::invalid_argument("MarkovOp: mixture weights must sum to 1");
    for (int i = 0; i < 3; ++i) wd_[static_cast<size_t>(i)] = static_cast<double>(w_[static_cast<size_t>(i)]);
    build_rows();
  }

  static MarkovOp m_ell(u64 ell, int R, TailPolicy p = TailPolicy::ParityTop) { return {ell, 0, 1, 0, R, p}; }
  static MarkovOp m_ell_squared(u64 ell, int R, TailPolicy p = TailPolicy::ParityTop) { return {ell, 0, 0, 1, R, p}; }
  /// (5/6) I + (1/6) M_ell^2, the S_3 instance.
  static MarkovOp m_T(u64 ell, int R, TailPolicy p = TailPolicy::ParityTop) { return {ell, rat(5, 6), 0, rat(1, 6), R, p}; }

  u64 ell() const { return ell_; }
  int R() const { return R_; }
  TailPolicy policy() const { return policy_; }
  const Rational& weight(int i) const { return w_.at(static_cast<size_t>(i)); }
  double tail_tolerance() const { return tol_; }
  bool parity_preserving() const { return w_[1] == 0; }

  /// Exact untruncated transitions from state r.
  std::vector<std::pair<int, Rational>> transitions_exact(int r) const {
    std::map<int, Rational> acc;
    if (w_[0] != 0) acc[r] += w_[0];
    if (w_[1] != 0)
      for (const auto& [s, p] : one_step(r)) acc[s] += w_[1] * p;
    if (w_[2] != 0)
      for (const auto& [s, p] : two_step(r)) acc[s] += w_[2] * p;
    std::vector<std::pair<int, Rational>> out;
    for (auto& [s, p] : acc)
      if (p != 0) out.emplace_back(s, p);
    return out;
  }

  /// M_ell from r: down with 1 - ell^{-r}, up with ell^{-r}.
  std::vector<std::pair<int, Rational>> one_step(int r) const {
    Rational up = inv_pow(r);
    std::vector<std::pair<int, Rational>> out;
    if (up != 1) out.emplace_back(r - 1, 1 - up);
    out.emplace_back(r + 1, up);
    return out;
  }

  /// Composition of two M_ell steps from r.
  std::vector<std::pair<int, Rational>> two_step(int r) const {
    Rational dd = (1 - inv_pow(r)) * (r >= 1 ? 1 - inv_pow(r - 1) : Rational(0));
    Rational uu = inv_pow(r) * inv_pow(r + 1);
    Rational st = 1 - dd - uu;
    std::vector<std::pair<int, Rational>> out;
    if (dd != 0) out.emplace_back(r - 2, dd);
    if (st != 0) out.emplace_back(r, st);
    out.emplace_back(r + 2, uu);
    return out;
  }

  /// Truncated floating-point row: destination states within {0..R}.
  const std::vector<std::pair<int, double>>& row(int r) const { return rows_.at(static_cast<size_t>(r)); }
  /// Mass of row r that left {0..R} before being routed by the tail policy.
  double overflow(int r) const { return overflow_.at(static_cast<size_t>(r)); }

  int route(int s) const {
    if (s <= R_) return s;
    if (policy_ == TailPolicy::StickyTop) return R_;
    return ((s - R_) % 2 == 0) ? R_ : R_ - 1;
  }

 private:
  Rational inv_pow(int r) const {
    if (r < 0) throw std::logic_error("negative rank");
    return Rational(1) / Rational(big_pow(BigInt(ell_), static_cast<unsigned>(r)));
  }

  void build_rows() {
    rows_.resize(static_cast<size_t>(R_) + 1);
    overflow_.assign(static_cast<size_t>(R_) + 1, 0.0);
    for (int r = 0; r <= R_; ++r) {
      std::map<int, double> acc;
      for (const auto& [s, p] : transitions_exact(r)) {
        double v = static_cast<double>(p);
        if (s > R_) overflow_[static_cast<size_t>(r)] += v;
        acc[route(s)] += v;
      }
      for (auto& [s, p] : acc) rows_[static_cast<size_t>(r)].emplace_back(s, p);
    }
  }

  u64 ell_;
  std::array<Rational, 3> w_;
  std::array<double, 3> wd_{};
  int R_;
  TailPolicy policy_;
  double tol_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<double> overflow_;
};

inline RankDist step(const MarkovOp& op, const RankDist& d) {
  if (d.R() != op.R()) throw std::invalid_argument("apply: distribution and operator truncations differ");
  RankDist out;
  out.probs.assign(d.probs.size(), 0.0);
  out.tail = d.tail;
  double overflow = 0.0;
  for (int r = 0; r <= op.R(); ++r) {
    const double m = d.probs[static_cast<size_t>(r)];
    if (m == 0.0) continue;
    overflow += m * op.overflow(r);
    for (const auto& [s, p] : op.row(r)) out.probs[static_cast<size_t>(s)] += m * p;
  }
  if (overflow > op.tail_tolerance())
    throw std::domain_error("apply: mass " + std::to_string(overflow) + " left the truncated range; increase R");
  return out;
}

/// n-fold application in double precision with the operator's tail policy.
inline RankDist apply(const MarkovOp& op, RankDist d, int n) {
  if (d.tail > op.tail_tolerance()) throw std::domain_error("apply: input tail exceeds tolerance; increase R");
  for (int i = 0; i < n; ++i) d = step(op, d);
  return d;
}

/// max_r |(d op)(r) - d(r)|, the tail included.
inline double fixed_point_residual(const MarkovOp& op, const RankDist& d) {
  const RankDist e = step(op, d);
  double m = std::fabs(e.tail - d.tail);
  for (size_t r = 0; r < d.probs.size(); ++r) m = std::max(m, std::fabs(e.probs[r] - d.probs[r]));
  return m;
}

/// n-fold application in exact rationals with no truncation.
inline ExactDist apply_exact(const MarkovOp& op, ExactDist d, int n) {
  for (int i = 0; i < n; ++i) {
    ExactDist out;
    for (const auto& [r, m] : d) {
      if (m == 0) continue;
      for (const auto& [s, p] : op.transitions_exact(r)) out[s] += m * p;
    }
    d = std::move(out);
  }
  return d;
}

inline Rational exact_parity(const ExactDist& d) {
  Rational s = 0;
  for (const auto& [r, m] : d)
    if (r % 2 != 0) s += m;
  return s;
}

inline Rational exact_total(const ExactDist& d) {
  Rational s = 0;
  for (const auto& [r, m] : d) s += m;
  return s;
}

// ---------------------------------------------------------------------------
// Stationary laws

/// prod_{j>=1} (1 + ell^{-j})^{-1}, summed until the factor is 1 to working precision.
template <class Real = HighPrec>
Real pr_normalizer(u64 ell) {
  Real n = 1, x = 1;
  const Real inv = Real(1) / Real(ell);
  const Real eps = std::numeric_limits<Real>::epsilon();
  for (int j = 1; j < 100000; ++j) {
    x *= inv;
    n /= (1 + x);
    if (x < eps) break;
  }
  return n;
}

/// prod_{j=1}^r ell/(ell^j - 1).
template <class Real = HighPrec>
Real pr_product(u64 ell, int r) {
  Real w = 1, lj = 1;
  for (int j = 1; j <= r; ++j) {
    lj *= Real(ell);
    w *= Real(ell) / (lj - 1);
  }
  return w;
}

/// N * prod_{j<=r} ell/(ell^j - 1): the weight that equals P(ell, 1) at r = 0.
/// These weights sum to 1 over each parity class separately.
template <class Real = HighPrec>
Real pr_weight(u64 ell, int r) {
  return pr_normalizer<Real>(ell) * pr_product<Real>(ell, r);
}

namespace detail {

// Bound on sum_{r > R} w(r): the ratios w(r+1)/w(r) = ell/(ell^{r+1}-1) decrease.
inline double pr_weight_tail(u64 ell, int R) {
  HighPrec next = pr_weight<HighPrec>(ell, R + 1);
  HighPrec ratio = HighPrec(ell) / (pow(HighPrec(ell), R + 2) - 1);
  return static_cast<double>(next / (1 - ratio));
}

}  // namespace detail

/// Poonen-Rains law: pr_weight / 2, a probability distribution on {0..R}.
inline RankDist pr_distribution(u64 ell, int R) {
  RankDist d;
  const HighPrec N = pr_normalizer<HighPrec>(ell);
  for (int r = 0; r <= R; ++r) d.probs.push_back(static_cast<double>(N * pr_product<HighPrec>(ell, r) / 2));
  d.tail = detail::pr_weight_tail(ell, R) / 2;
  return d;
}

/// Mass on odd states.
inline double parity(const RankDist& d) {
  double s = 0.0;
  for (size_t r = 1; r < d.probs.size(); r += 2) s += d.probs[r];
  return s;
}

/// (1/2 + (-1)^r (1/2 - rho0)) * 2 pi(r): even states share 1 - rho0, odd states rho0.
inline RankDist parity_weighted_pr(u64 ell, double rho0, int R) {
  if (!(rho0 >= 0.0 && rho0 <= 1.0)) throw std::invalid_argument("parity_weighted_pr: rho0 must lie in [0,1]");
  RankDist d;
  const HighPrec N = pr_normalizer<HighPrec>(ell);
  for (int r = 0; r <= R; ++r) {
    HighPrec c = (r % 2 == 0) ? HighPrec(1 - rho0) : HighPrec(rho0);
    d.probs.push_back(static_cast<double>(c * N * pr_product<HighPrec>(ell, r)));
  }
  d.tail = detail::pr_weight_tail(ell, R) * std::max(rho0, 1 - rho0);
  return d;
}

inline double total_variation(const RankDist& a, const RankDist& b) {
  const size_t n = std::max(a.probs.size(), b.probs.size());
  double s = std::fabs(a.tail - b.tail);
  for (size_t i = 0; i < n; ++i) {
    double x = i < a.probs.size() ? a.probs[i] : 0.0;
    double y = i < b.probs.size() ? b.probs[i] : 0.0;
    s += std::fabs(x - y);
  }
  return s / 2;
}

// ---------------------------------------------------------------------------
// Convergence rate

struct GammaEstimate {
  double gamma = 0;        // max over the closed classes
  double power = 0;        // power-iteration value
  double fitted = 0;       // log-TV slope value
  std::vector<double> per_class;  // power iteration per closed class (even, odd) or a single entry
  int iterations = 0;
};

namespace detail {

inline std::vector<double> left_mul(const MarkovOp& op, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (int r = 0; r <= op.R(); ++r) {
    const double m = x[static_cast<size_t>(r)];
    if (m == 0.0) continue;
    for (const auto& [s, p] : op.row(r)) y[static_cast<size_t>(s)] += m * p;
  }
  return y;
}

inline double l1(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += std::fabs(v);
  return s;
}

// Subdominant modulus on the signed measures of zero mass supported on `mask`.
inline double power_iteration(const MarkovOp& op, const std::vector<bool>& mask, const std::vector<double>& stat,
                              int max_iter, int& iters_used) {
  std::vector<double> x(static_cast<size_t>(op.R()) + 1, 0.0);
  // a generic start: alternating-ish weights, then remove the mass
  double mass = 0;
  int count = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!mask[i]) continue;
    x[i] = 1.0 / (1.0 + static_cast<double>(i)) + (count % 3 == 0 ? 0.5 : 0.0);
    mass += x[i];
    ++count;
  }
  for (size_t i = 0; i < x.size(); ++i)
    if (mask[i]) x[i] -= mass * stat[i];
  double prev = -1, est = 0;
  for (int it = 1; it <= max_iter; ++it) {
    double n0 = l1(x);
    std::vector<double> y = left_mul(op, x);
    y = left_mul(op, y);
    // remove the stationary component that roundoff reintroduces
    double m = 0;
    for (size_t i = 0; i < y.size(); ++i)
      if (mask[i]) m += y[i];
    for (size_t i = 0; i < y.size(); ++i)
      if (mask[i]) y[i] -= m * stat[i];
    double n1 = l1(y);
    if (n1 == 0.0) {
      iters_used = it;
      return 0.0;
    }
    est = std::sqrt(n1 / n0);
    for (auto& v : y) v /= n1;
    x = std::move(y);
    if (std::fabs(est - prev) < 1e-13) {
      iters_used = it;
      return est;
    }
    prev = est;
  }
  iters_used = max_iter;
  throw std::runtime_error("estimate_gamma: power iteration did not converge");
}

}  // namespace detail

/// TV(op^n start, target) for n = 0..n_max.
inline std::vector<double> tv_curve(const MarkovOp& op, RankDist start, const RankDist& target, int n_max) {
  std::vector<double> out;
  for (int n = 0; n <= n_max; ++n) {
    out.push_back(total_variation(start, target));
    start = step(op, start);
  }
  return out;
}

/// Least-squares slope of log TV over [n_lo, n_hi], returned as exp(slope).
inline double fit_tv_rate(const std::vector<double>& tv, int n_lo, int n_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (int n = n_lo; n <= n_hi && n < static_cast<int>(tv.size()); ++n) {
    if (tv[static_cast<size_t>(n)] <= 0) continue;
    double y = std::log(tv[static_cast<size_t>(n)]);
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
    ++k;
  }
  if (k < 2) throw std::runtime_error("fit_tv_rate: not enough positive points");
  double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return std::exp(slope);
}

/// Subdominant eigenvalue modulus of the truncated operator, by power
/// iteration on zero-mass signed measures of each closed class, cross-checked
/// against the decay rate of TV distance from the worst point mass.
inline GammaEstimate estimate_gamma(const MarkovOp& op, double agreement = 1e-3) {
  if (op.R() < 20) throw std::invalid_argument("estimate_gamma: R must be >= 20");
  if (op.weight(0) == 1) throw std::invalid_argument("estimate_gamma: identity operator does not mix");
  if (op.weight(1) == 0 && op.weight(2) == 0) throw std::invalid_argument("estimate_gamma: degenerate operator");
  GammaEstimate g;
  const size_t n = static_cast<size_t>(op.R()) + 1;
  std::vector<std::vector<bool>> masks;
  std::vector<std::vector<double>> stats;
  if (op.parity_preserving()) {
    std::vector<bool> even(n), odd(n);
    for (size_t i = 0; i < n; ++i) (i % 2 == 0 ? even : odd)[i] = true;
    masks = {even, odd};
    stats = {parity_weighted_pr(op.ell(), 0.0, op.R()).probs, parity_weighted_pr(op.ell(), 1.0, op.R()).probs};
  } else {
    masks = {std::vector<bool>(n, true)};
    stats = {pr_distribution(op.ell(), op.R()).probs};
  }
  int worst = 0;
  for (size_t c = 0; c < masks.size(); ++c) {
    int it = 0;
    double v = detail::power_iteration(op, masks[c], stats[c], 200000, it);
    g.iterations = std::max(g.iterations, it);
    g.per_class.push_back(v);
    if (v > g.power) {
      g.power = v;
      worst = static_cast<int>(c);
    }
  }
  // Cross-check: decay of TV from a point mass in the slowest class.
  const u64 ell = op.ell();
  const int r0 = op.parity_preserving() ? worst : 0;
  RankDist target = op.parity_preserving() ? parity_weighted_pr(ell, r0 % 2 == 0 ? 0.0 : 1.0, op.R())
                                           : pr_distribution(ell, op.R());
  target.tail = 0;
  // Choose the fit window from the power estimate so TV stays well above roundoff.
  const double lg = std::log(g.power);
  int n_hi = static_cast<int>(std::min(4000.0, std::log(1e-11) / lg));
  int n_lo = std::max(5, n_hi / 2);
  auto tv = tv_curve(op, RankDist::point(r0, op.R()), target, n_hi);
  g.fitted = fit_tv_rate(tv, n_lo, n_hi);
  g.gamma = g.power;
  if (std::fabs(g.fitted - g.power) > agreement)
    throw std::runtime_error("estimate_gamma: power iteration (" + std::to_string(g.power) + ") and TV fit (" +
                             std::to_string(g.fitted) + ") disagree");
  if (!(g.gamma > 0 && g.gamma < 1)) throw std::runtime_error("estimate_gamma: estimate outside (0,1)");
  return g;
}

// ---------------------------------------------------------------------------
// alpha

enum class AlphaSign { Positive, Literal };

/// sup over rho in (0,1) of min(rho log rho + 1 - rho, rho log(1/gamma), -rho log(1 - delta0)).
/// With AlphaSign::Literal the middle term is rho log gamma (nonpositive), so the sup is 0.
inline double alpha_exponent(double gamma, double delta0, AlphaSign sign = AlphaSign::Positive,
                             double* argmax = nullptr) {
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("alpha_exponent: gamma must lie in (0,1)");
  if (!(delta0 > 0 && delta0 < 1)) throw std::invalid_argument("alpha_exponent: delta0 must lie in (0,1)");
  const double lg = sign == AlphaSign::Positive ? -std::log(gamma) : std::log(gamma);
  const double ld = -std::log(1 - delta0);
  auto f = [&](double rho) { return std::min({rho * std::log(rho) + 1 - rho, rho * lg, rho * ld}); };
  if (sign == AlphaSign::Literal) {
    if (argmax) *argmax = 0;
    return 0.0;
  }
  // f is increasing then decreasing on (0,1).
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double a = 0, b = 1;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  const double rho = (a + b) / 2;
  if (argmax) *argmax = rho;
  return f(rho);
}

// ---------------------------------------------------------------------------
// d-table

/// Printed transition table by place class: j -> probability.
inline std::map<int, Rational> dtable(u64 ell, int r, PlaceClass cls) {
  if (r < 0) throw std::invalid_argument("dtable: r must be >= 0");
  const Rational L(ell);
  const Rational lr = Rational(1) / Rational(big_pow(BigInt(ell), static_cast<unsigned>(r)));
  std::map<int, Rational> out;
  switch (cls) {
    case PlaceClass::P0: out[0] = 1; break;
    case PlaceClass::P1:
      out[-1] = 1 - lr;
      out[1] = lr;
      break;
    case PlaceClass::P2:
      out[-2] = 1 - (L + 1) * lr + L * lr * lr;
      out[0] = (L + 1) * (lr - lr * lr);
      out[2] = lr * lr;
      break;
    case PlaceClass::Ramified: throw std::invalid_argument("dtable: no row for ramified places");
  }
  return out;
}

struct DTableDiffRow {
  int r;
  int j;
  Rational printed;
  Rational two_step;
  Rational diff;  // printed - two_step
};

/// Printed P2 row against the exact two-step law of M_ell, r = 0..r_max.
inline std::vector<DTableDiffRow> compare_dtable_vs_two_step(u64 ell, int r_max) {
  if (r_max < 2) throw std::invalid_argument("compare_dtable_vs_two_step: r_max must be >= 2");
  MarkovOp m = MarkovOp::m_ell(ell, std::max(r_max + 4, 4));
  std::vector<DTableDiffRow> out;
  for (int r = 0; r <= r_max; ++r) {
    auto printed = dtable(ell, r, PlaceClass::P2);
    std::map<int, Rational> two;
    for (const auto& [s, p] : m.two_step(r)) two[s - r] += p;
    for (int j : {-2, 0, 2}) {
      Rational a = printed.count(j) ? printed[j] : Rational(0);
      Rational b = two.count(j) ? two[j] : Rational(0);
      out.push_back({r, j, a, b, a - b});
    }
  }
  return out;
}

}  // namespace supertwist
