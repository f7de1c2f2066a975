#pragma once

// Monte Carlo rank walks along the distinct irreducible factors of random
// monic twisting polynomials, the factor-count census and the supporting
// counting functions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>
#include <tuple>
#include <vector>

#include "supertwist/ff_poly.hpp"
#include "supertwist/markov.hpp"
#include "supertwist/place_classifier.hpp"
#include "supertwist/random.hpp"

namespace supertwist {

enum class TransitionMode { TwoStep, DTable };

inline const char* to_string(TransitionMode m) { return m == TransitionMode::TwoStep ? "two_step" : "d_table"; }

struct SimConfig {
  explicit SimConfig(CurveConfig c) : curve(std::move(c)) {}

  CurveConfig curve;
  int n = 30;
  u64 samples = 1;
  RankDist mu_star = RankDist::point(0, 60);
  TransitionMode mode = TransitionMode::TwoStep;
  u64 seed = 0;
  unsigned workers = 1;
  bool shuffle = false;        // process factors in random order instead of ascending degree
  bool strict_fhat = false;    // keep only samples with a large P0 factor
  double time_limit_seconds = 0;  // 0 disables the guard
};

inline void validate(const SimConfig& c) {
  if (c.n < 1) throw ConfigError("twist degree n must be >= 1");
  if (c.samples < 1) throw ConfigError("samples must be >= 1");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.mu_star.probs.empty()) throw ConfigError("mu_star is empty");
  double s = c.mu_star.tail;
  for (double p : c.mu_star.probs) {
    if (p < 0) throw ConfigError("mu_star has a negative entry");
    s += p;
  }
  if (std::fabs(s - 1) > 1e-12) throw ConfigError("mu_star does not sum to 1");
}

// ---------------------------------------------------------------------------
// Thresholds

/// m_{n,q} = log n + log log q (natural logs).
inline double m_nq(double n, double q) { return std::log(n) + std::log(std::log(q)); }

/// frak n = 4 m_{n,q}^2 / log q.
inline double frak_n(double n, double q) {
  const double m = m_nq(n, q);
  return 4 * m * m / std::log(q);
}

struct DeviationBound {
  double ratio = 0;  // bound / q^n
  double m = 0;
  double epsilon = 0;
  bool threshold_met = false;  // m > max(e^{e^e}, log 6 + log(ell^3 + g_T))
};

/// 4 max(n^{-rho log rho - 1 + rho}, 3 m^2 (1 - delta0)^{(1-eps) rho m}) with eps = 1/log log m.
inline DeviationBound deviation_bound(double n, double q, double rho, double delta0, u64 ell = 5, double g_T = 0) {
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("deviation_bound: rho must lie in (0,1)");
  if (!(delta0 > 0 && delta0 < 1)) throw std::invalid_argument("deviation_bound: delta0 must lie in (0,1)");
  DeviationBound b;
  const HighPrec m = HighPrec(std::log(n)) + log(log(HighPrec(q)));
  if (m <= exp(HighPrec(1))) throw std::domain_error("deviation_bound: m_{n,q} <= e leaves epsilon undefined");
  const HighPrec eps = 1 / log(log(m));
  const HighPrec r(rho);
  const HighPrec first = pow(HighPrec(n), -r * log(r) - 1 + r);
  const HighPrec second = 3 * m * m * pow(HighPrec(1 - delta0), (1 - eps) * r * m);
  b.ratio = static_cast<double>(4 * (first > second ? first : second));
  b.m = static_cast<double>(m);
  b.epsilon = static_cast<double>(eps);
  const double L = static_cast<double>(ell);
  const double thr = std::max(std::exp(std::exp(std::exp(1.0))), std::log(6.0) + std::log(L * L * L + g_T));
  b.threshold_met = b.m > thr;
  return b;
}

// ---------------------------------------------------------------------------
// Factor statistics

struct FhatStats {
  int w = 0;        // distinct irreducible factors
  int w_prime = 0;  // distinct factors of degree > frak n
  int N = 0;        // degree of the product of all factors with multiplicity
  bool has_large_P0 = false;
};

inline FhatStats fhat_from_factorization(const Factorization& fac, const CurveConfig& curve, int n) {
  FhatStats s;
  const double cut = frak_n(std::max(n, 2), static_cast<double>(curve.q()));
  for (const auto& [g, m] : fac.factors) {
    ++s.w;
    s.N += m * g.degree();
    if (g.degree() > cut) {
      ++s.w_prime;
      if (classify_place(curve, Place{g}).place == PlaceClass::P0) s.has_large_P0 = true;
    }
  }
  return s;
}

inline FhatStats fhat_census(const Poly& f, const CurveConfig& curve, RandomStream& rng) {
  if (f.is_zero()) throw std::invalid_argument("fhat_census: zero polynomial");
  return fhat_from_factorization(factor(f, rng), curve, f.degree());
}

// ---------------------------------------------------------------------------
// Rank walks

inline int draw_rank(const RankDist& mu, RandomStream& rng) {
  double u = rng.uniform01();
  for (size_t r = 0; r < mu.probs.size(); ++r) {
    if (u < mu.probs[r]) return static_cast<int>(r);
    u -= mu.probs[r];
  }
  for (size_t r = mu.probs.size(); r-- > 0;)
    if (mu.probs[r] > 0) return static_cast<int>(r);
  return 0;
}

/// One P2 transition from rank r.
inline int p2_transition(int r, u64 ell, TransitionMode mode, RandomStream& rng) {
  const double L = static_cast<double>(ell);
  const double lr = std::pow(L, -r);
  double down, up;
  if (mode == TransitionMode::TwoStep) {
    down = (1 - lr) * (r >= 1 ? 1 - std::pow(L, 1 - r) : 0.0);
    up = lr * lr / L;
  } else {
    down = 1 - (L + 1) * lr + L * lr * lr;
    up = lr * lr;
  }
  if (down < 0) down = 0;
  const double u = rng.uniform01();
  if (u < down) return r - 2;
  if (u < down + up) return r + 2;
  return r;
}

struct WalkResult {
  int initial = 0;
  int final_rank = 0;
  std::array<int, 4> class_counts{};  // by FrobClass, distinct factors
  FhatStats fhat;
};

/// Rank walk for one twisting polynomial; Ramified and P0 factors leave the rank unchanged.
inline WalkResult rank_walk_detail(const Poly& f, const SimConfig& config, RandomStream& rng) {
  WalkResult w;
  auto fac = factor(f, rng);
  w.fhat = fhat_from_factorization(fac, config.curve, f.degree());
  w.initial = draw_rank(config.mu_star, rng);
  std::vector<size_t> order(fac.factors.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
  int r = w.initial;
  for (size_t i : order) {
    auto c = classify_place(config.curve, Place{fac.factors[i].first});
    ++w.class_counts[static_cast<size_t>(c.frob)];
    if (c.place == PlaceClass::P2) r = p2_transition(r, config.curve.ell, config.mode, rng);
  }
  w.final_rank = r;
  return w;
}

inline int rank_walk(const Poly& f, const SimConfig& config, RandomStream& rng) {
  return rank_walk_detail(f, config, rng).final_rank;
}

// ---------------------------------------------------------------------------
// Experiments

struct SimReport {
  u64 seed = 0;
  int n = 0;
  u64 samples = 0;
  u64 kept = 0;  // samples entering the law (all unless strict_fhat)
  TransitionMode mode = TransitionMode::TwoStep;
  std::vector<u64> counts;  // final rank histogram
  RankDist empirical;
  double parity = 0;
  double rho0 = 0;
  RankDist target;
  double tv = 0;
  std::array<u64, 4> class_counts{};      // distinct factors by FrobClass
  std::vector<u64> p2_histogram;          // samples by number of distinct P2 factors
  std::vector<u64> omega_histogram;       // samples by w
  u64 with_large_P0 = 0;
  u64 with_ramified = 0;
  std::map<std::tuple<int, int, bool>, u64> fhat;  // (w, w', has_large_P0) -> samples
};

namespace detail {

struct Partial {
  std::vector<u64> counts;
  std::array<u64, 4> class_counts{};
  std::vector<u64> p2_histogram;
  std::vector<u64> omega_histogram;
  u64 with_large_P0 = 0, with_ramified = 0, kept = 0;
  std::map<std::tuple<int, int, bool>, u64> fhat;

  static void bump(std::vector<u64>& v, size_t i, u64 by = 1) {
    if (v.size() <= i) v.resize(i + 1, 0);
    v[i] += by;
  }
  void merge(const Partial& o) {
    for (size_t i = 0; i < o.counts.size(); ++i) bump(counts, i, o.counts[i]);
    for (size_t i = 0; i < 4; ++i) class_counts[i] += o.class_counts[i];
    for (size_t i = 0; i < o.p2_histogram.size(); ++i) bump(p2_histogram, i, o.p2_histogram[i]);
    for (size_t i = 0; i < o.omega_histogram.size(); ++i) bump(omega_histogram, i, o.omega_histogram[i]);
    with_large_P0 += o.with_large_P0;
    with_ramified += o.with_ramified;
    kept += o.kept;
    for (const auto& [k, v] : o.fhat) fhat[k] += v;
  }
};

}  // namespace detail

/// Sample i draws from RandomStream::substream(seed, i), so the report does
/// not depend on how samples are split across workers.
inline SimReport run_experiment(const SimConfig& config) {
  validate(config);
  if (!certify_s3(config.curve).certified) throw ConfigError("curve is not S_3-certified");
  const auto start = std::chrono::steady_clock::now();
  const unsigned W = static_cast<unsigned>(std::min<u64>(config.workers, config.samples));
  std::vector<detail::Partial> parts(W);
  std::vector<std::exception_ptr> errors(W);
  auto job = [&](unsigned w) {
    try {
      const u64 begin = config.samples * w / W, end = config.samples * (w + 1) / W;
      auto& P = parts[w];
      for (u64 i = begin; i < end; ++i) {
        if (config.time_limit_seconds > 0 && (i - begin) % 256 == 0) {
          double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          if (el > config.time_limit_seconds) throw std::runtime_error("run_experiment: time limit exceeded");
        }
        RandomStream rng = RandomStream::substream(config.seed, i);
        Poly f = sample_monic(config.curve.field, config.n, rng);
        WalkResult wr = rank_walk_detail(f, config, rng);
        for (size_t k = 0; k < 4; ++k) P.class_counts[k] += static_cast<u64>(wr.class_counts[k]);
        detail::Partial::bump(P.p2_histogram, static_cast<size_t>(wr.class_counts[static_cast<size_t>(FrobClass::Identity)]));
        detail::Partial::bump(P.omega_histogram, static_cast<size_t>(wr.fhat.w));
        if (wr.fhat.has_large_P0) ++P.with_large_P0;
        if (wr.class_counts[static_cast<size_t>(FrobClass::Ramified)] > 0) ++P.with_ramified;
        ++P.fhat[{wr.fhat.w, wr.fhat.w_prime, wr.fhat.has_large_P0}];
        if (config.strict_fhat && !wr.fhat.has_large_P0) continue;
        ++P.kept;
        detail::Partial::bump(P.counts, static_cast<size_t>(wr.final_rank));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (W == 1) {
    job(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < W; ++w) pool.emplace_back(job, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  detail::Partial all;
  for (const auto& p : parts) all.merge(p);

  SimReport rep;
  rep.seed = config.seed;
  rep.n = config.n;
  rep.samples = config.samples;
  rep.kept = all.kept;
  rep.mode = config.mode;
  rep.counts = all.counts;
  rep.class_counts = all.class_counts;
  rep.p2_histogram = all.p2_histogram;
  rep.omega_histogram = all.omega_histogram;
  rep.with_large_P0 = all.with_large_P0;
  rep.with_ramified = all.with_ramified;
  rep.fhat = all.fhat;
  const int R = config.mu_star.R();
  rep.empirical.probs.assign(static_cast<size_t>(R) + 1, 0.0);
  for (size_t r = 0; r < rep.counts.size(); ++r) {
    const double v = rep.kept ? static_cast<double>(rep.counts[r]) / rep.kept : 0.0;
    if (static_cast<int>(r) <= R)
      rep.empirical.probs[r] = v;
    else
      rep.empirical.tail += v;
  }
  rep.parity = parity(rep.empirical);
  rep.rho0 = parity(config.mu_star);
  rep.target = parity_weighted_pr(config.curve.ell, rep.rho0, R);
  rep.tv = total_variation(rep.empirical, rep.target);
  return rep;
}

/// Law of the final rank given the P2-count frequencies: sum_k freq(k) mu_star (P2 step)^k,
/// with the P2 step taken from `mode`. Evaluated on {0..R} in double precision.
inline RankDist predicted_law(const SimConfig& config, const std::vector<u64>& p2_histogram) {
  const int R = config.mu_star.R();
  const u64 ell = config.curve.ell;
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(R) + 1);
  for (int r = 0; r <= R; ++r) {
    if (config.mode == TransitionMode::TwoStep) {
      MarkovOp m = MarkovOp::m_ell_squared(ell, R + 4);
      for (const auto& [s, p] : m.two_step(r)) rows[static_cast<size_t>(r)].emplace_back(std::min(s, R), static_cast<double>(p));
    } else {
      for (const auto& [j, p] : dtable(ell, r, PlaceClass::P2))
        if (p != 0) rows[static_cast<size_t>(r)].emplace_back(std::min(r + j, R), static_cast<double>(p));
    }
  }
  u64 total = 0;
  for (u64 c : p2_histogram) total += c;
  RankDist out;
  out.probs.assign(static_cast<size_t>(R) + 1, 0.0);
  std::vector<double> cur = config.mu_star.probs;
  for (size_t k = 0; k < p2_histogram.size(); ++k) {
    const double wgt = total ? static_cast<double>(p2_histogram[k]) / total : 0.0;
    for (int r = 0; r <= R; ++r) out.probs[static_cast<size_t>(r)] += wgt * cur[static_cast<size_t>(r)];
    std::vector<double> next(cur.size(), 0.0);
    for (int r = 0; r <= R; ++r)
      for (const auto& [s, p] : rows[static_cast<size_t>(r)]) next[static_cast<size_t>(s)] += cur[static_cast<size_t>(r)] * p;
    cur = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact factor-count distribution

inline BigInt binomial(const BigInt& n, unsigned k) {
  if (n < k) return 0;
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

/// Number of monic degree-n polynomials over F_q with exactly omega distinct
/// irreducible factors, indexed by omega.
inline std::vector<BigInt> omega_distribution(u64 q, int n) {
  if (n < 1) throw std::invalid_argument("omega_distribution: n must be >= 1");
  if (n > 64) throw std::invalid_argument("omega_distribution: n must be <= 64");
  // T[deg][w]
  std::vector<std::vector<BigInt>> T(static_cast<size_t>(n) + 1, std::vector<BigInt>(static_cast<size_t>(n) + 1, 0));
  T[0][0] = 1;
  for (int d = 1; d <= n; ++d) {
    const BigInt Nd = count_monic_irreducibles(q, d);
    // factor for degree d: sum over k distinct, total multiplicity s >= k of C(Nd,k) C(s-1,k-1) y^k x^{ds}
    std::vector<std::vector<BigInt>> next = T;  // k = 0 term
    for (int k = 1; k * d <= n; ++k) {
      const BigInt ck = binomial(Nd, static_cast<unsigned>(k));
      if (ck == 0) break;
      for (int s = k; s * d <= n; ++s) {
        const BigInt coef = ck * binomial(BigInt(s - 1), static_cast<unsigned>(k - 1));
        for (int deg = 0; deg + s * d <= n; ++deg)
          for (int w = 0; w + k <= n; ++w)
            if (T[static_cast<size_t>(deg)][static_cast<size_t>(w)] != 0)
              next[static_cast<size_t>(deg + s * d)][static_cast<size_t>(w + k)] +=
                  coef * T[static_cast<size_t>(deg)][static_cast<size_t>(w)];
      }
    }
    T = std::move(next);
  }
  std::vector<BigInt> out = T[static_cast<size_t>(n)];
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

}  // namespace supertwist
