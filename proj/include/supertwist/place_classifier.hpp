#pragma once

// S_3 cubics over F_q(t): configuration, certification, Frobenius classes of
// places, density censuses, the 2x2 representation checks over F_ell and the
// effective Chebotarev audit.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "supertwist/ff_poly.hpp"

namespace supertwist {

// ---------------------------------------------------------------------------
// Configuration

/// Errors for an ell-context (ell, q) pair; empty when valid.
inline std::vector<std::string> ell_context_errors(u64 ell, const FieldSpec& spec) {
  std::vector<std::string> errs;
  if (ell < 5 || !is_prime_u64(ell)) errs.push_back("ell must be a prime >= 5 (got " + std::to_string(ell) + ")");
  if (!is_prime_u64(spec.p)) errs.push_back("p must be prime (got " + std::to_string(spec.p) + ")");
  if (spec.p == 2 || spec.p == 3) errs.push_back("characteristic p must not be 2 or 3 (got " + std::to_string(spec.p) + ")");
  if (spec.p == ell) errs.push_back("characteristic p must differ from ell");
  if (ell >= 2 && spec.e >= 1 && is_prime_u64(spec.p)) {
    const BigInt q = big_pow(BigInt(spec.p), spec.e);
    if (q % ell != 1)
      errs.push_back("q = " + q.str() + " is not congruent to 1 mod ell = " + std::to_string(ell) + " (need ell | q - 1)");
  }
  return errs;
}

inline void throw_if_errors(const std::vector<std::string>& errs) {
  if (errs.empty()) return;
  std::string msg;
  for (const auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
  throw ConfigError(msg);
}

struct CurveConfig {
  u64 ell = 0;
  FieldPtr field;
  CubicX F;
  Poly disc;
  long genus_L_bound = 0;
  bool infinity_in_sigma = true;

  u64 q() const { return field->q(); }
};

/// Riemann-Hurwitz style upper bound 1 - |G| + (|G|/2)(deg disc + 1) with |G| = 6.
inline long default_genus_L_bound(const Poly& disc) { return 1 - 6 + 3 * (disc.degree() + 1); }

/// Arithmetic validation (ell, q, p, separability). Every violated
/// hypothesis is reported in a single ConfigError.
inline CurveConfig make_curve(u64 ell, const FieldPtr& field, const Poly& a0, const Poly& a1, const Poly& a2,
                              std::optional<long> genus_L_bound = std::nullopt) {
  auto errs = ell_context_errors(ell, field->spec());
  CubicX F = make_cubic(a0, a1, a2);
  Poly disc = discriminant_cubic(F);
  if (disc.is_zero()) errs.push_back("discriminant is zero: the cubic is inseparable");
  throw_if_errors(errs);
  CurveConfig c{ell, field, F, disc, genus_L_bound ? *genus_L_bound : default_genus_L_bound(disc), true};
  return c;
}

// ---------------------------------------------------------------------------
// S_3 certificate

struct S3Certificate {
  bool certified = false;
  std::string reason;
  bool has_root = false;
  std::optional<Poly> root;
  bool disc_is_square = false;
  // disc = (nonsquare constant) * square gives a constant-field extension.
  bool constant_field_ok = false;
};

inline Poly eval_cubic(const CubicX& F, const Poly& x) {
  return ((F.a[3] * x + F.a[2]) * x + F.a[1]) * x + F.a[0];
}

inline S3Certificate certify_s3(const CurveConfig& curve, RandomStream& rng) {
  if (curve.disc.is_zero()) throw std::invalid_argument("certify_s3: zero discriminant");
  if (!curve.F.is_monic()) throw std::invalid_argument("certify_s3: cubic must be monic in x");
  S3Certificate cert;
  const FieldPtr& f = curve.field;
  const Poly& a0 = curve.F.a[0];
  std::vector<Poly> candidates;
  if (a0.is_zero()) {
    candidates.push_back(Poly(f));
  } else {
    // all monic divisors of a0, times every unit of F_q
    auto fac = factor(a0, rng);
    std::vector<Poly> divisors{Poly::one(f)};
    for (const auto& [g, m] : fac.factors) {
      std::vector<Poly> next;
      for (const auto& d : divisors) {
        Poly cur = d;
        for (int k = 0; k <= m; ++k) {
          next.push_back(cur);
          cur = cur * g;
        }
      }
      divisors = std::move(next);
    }
    for (const auto& d : divisors)
      for (u64 u = 1; u < f->q(); ++u) candidates.push_back(scale(d, u));
  }
  for (const auto& r : candidates) {
    if (eval_cubic(curve.F, r).is_zero()) {
      cert.has_root = true;
      cert.root = r;
      break;
    }
  }
  auto dfac = factor(curve.disc, rng);
  bool odd_mult = false;
  for (const auto& [g, m] : dfac.factors)
    if (m % 2 == 1) odd_mult = true;
  const bool unit_square = f->is_square(dfac.unit.rep());
  cert.disc_is_square = !odd_mult && unit_square;
  cert.constant_field_ok = odd_mult;
  if (cert.has_root) {
    cert.reason = "cubic has the root x = " + cert.root->to_string() + " in F_q[t]";
  } else if (cert.disc_is_square) {
    cert.reason = "discriminant is a square in F_q[t]: Galois group is at most A_3";
  } else {
    cert.certified = true;
  }
  return cert;
}

inline S3Certificate certify_s3(const CurveConfig& curve) {
  RandomStream rng(0);
  return certify_s3(curve, rng);
}

/// make_curve followed by the S_3 certificate; rejection lists every problem.
inline CurveConfig validate_config(u64 ell, const FieldPtr& field, const Poly& a0, const Poly& a1, const Poly& a2,
                                   std::optional<long> genus_L_bound = std::nullopt) {
  CurveConfig c = make_curve(ell, field, a0, a1, a2, genus_L_bound);
  auto cert = certify_s3(c);
  if (!cert.certified) throw ConfigError("S_3 certificate failed: " + cert.reason);
  return c;
}

// ---------------------------------------------------------------------------
// Place classification

enum class FrobClass { Identity, Transposition, ThreeCycle, Ramified };
enum class PlaceClass { P0, P1, P2, Ramified };

inline const char* to_string(FrobClass c) {
  switch (c) {
    case FrobClass::Identity: return "Identity";
    case FrobClass::Transposition: return "Transposition";
    case FrobClass::ThreeCycle: return "ThreeCycle";
    case FrobClass::Ramified: return "Ramified";
  }
  return "?";
}

inline const char* to_string(PlaceClass c) {
  switch (c) {
    case PlaceClass::P0: return "P0";
    case PlaceClass::P1: return "P1";
    case PlaceClass::P2: return "P2";
    case PlaceClass::Ramified: return "Ramified";
  }
  return "?";
}

/// Order rule: trivial Frobenius -> P2; order 2 or 3 (prime to ell >= 5) -> P0.
inline PlaceClass place_class_of(FrobClass c) {
  switch (c) {
    case FrobClass::Identity: return PlaceClass::P2;
    case FrobClass::Transposition:
    case FrobClass::ThreeCycle: return PlaceClass::P0;
    case FrobClass::Ramified: return PlaceClass::Ramified;
  }
  return PlaceClass::Ramified;
}

/// Class sizes in S_3 for the unramified tags.
inline int class_size(FrobClass c) {
  switch (c) {
    case FrobClass::Identity: return 1;
    case FrobClass::Transposition: return 3;
    case FrobClass::ThreeCycle: return 2;
    default: return 0;
  }
}

/// A finite place: monic irreducible of F_q[t].
struct Place {
  Poly pi;
  int degree() const { return pi.degree(); }

  static Place checked(const Poly& p) {
    if (p.degree() < 1 || !p.is_monic() || !is_irreducible(p))
      throw std::invalid_argument("place must be a monic irreducible polynomial");
    return Place{p};
  }
};

namespace detail {

// Arithmetic in (F_q[t]/v)[X]/(X^3 + b2 X^2 + b1 X + b0).
class CubicResidueRing {
 public:
  using Elem = std::array<Poly, 3>;

  CubicResidueRing(const CubicX& F, const Poly& v) : v_(v), b_{F.a[0] % v, F.a[1] % v, F.a[2] % v} {
    const FieldPtr& f = v.field();
    const int d = v.degree();
    // Frobenius on F_q[t]/v: columns t^{q i} mod v
    Poly s = powmod(Poly::t(f), f->q(), v);
    Poly cur = Poly::one(f) % v;
    for (int i = 0; i < d; ++i) {
      frob_cols_.push_back(cur);
      cur = mulmod(cur, s, v);
    }
    Elem X{Poly(f), Poly::one(f), Poly(f)};
    xi_ = pow(X, f->q());
    xi2_ = mul(xi_, xi_);
  }

  Poly frob(const Poly& a) const {
    Poly r(v_.field());
    for (size_t j = 0; j < a.coeffs().size(); ++j)
      if (a.coeffs()[j]) r = r + scale(frob_cols_[j], a.coeffs()[j]);
    return r;
  }

  Elem mul(const Elem& x, const Elem& y) const {
    std::array<Poly, 5> c{Poly(v_.field()), Poly(v_.field()), Poly(v_.field()), Poly(v_.field()), Poly(v_.field())};
    for (int i = 0; i < 3; ++i) {
      if (x[i].is_zero()) continue;
      for (int j = 0; j < 3; ++j) {
        if (y[j].is_zero()) continue;
        c[i + j] = c[i + j] + mulmod(x[i], y[j], v_);
      }
    }
    for (int k = 4; k >= 3; --k) {
      if (c[k].is_zero()) continue;
      for (int i = 0; i < 3; ++i) c[k - 3 + i] = c[k - 3 + i] - mulmod(c[k], b_[i], v_);
    }
    return {c[0], c[1], c[2]};
  }

  Elem pow(Elem base, u64 k) const {
    Elem r{Poly::one(v_.field()) % v_, Poly(v_.field()), Poly(v_.field())};
    while (k) {
      if (k & 1) r = mul(r, base);
      k >>= 1;
      if (k) base = mul(base, base);
    }
    return r;
  }

  // x -> x^q
  Elem phi(const Elem& x) const {
    Elem r{frob(x[0]), Poly(v_.field()), Poly(v_.field())};
    Poly f1 = frob(x[1]), f2 = frob(x[2]);
    for (int i = 0; i < 3; ++i) {
      if (!f1.is_zero()) r[i] = r[i] + mulmod(f1, xi_[i], v_);
      if (!f2.is_zero()) r[i] = r[i] + mulmod(f2, xi2_[i], v_);
    }
    return r;
  }

  /// Norm from F_q[t]/v down to F_q.
  u64 norm(const Poly& a) const {
    Poly r = a % v_;
    Poly cur = r;
    for (int i = 1; i < v_.degree(); ++i) {
      cur = frob(cur);
      r = mulmod(r, cur, v_);
    }
    return r.coeff(0);
  }

 private:
  Poly v_;
  std::array<Poly, 3> b_;
  std::vector<Poly> frob_cols_;
  Elem xi_{Poly(v_.field()), Poly(v_.field()), Poly(v_.field())};
  Elem xi2_{xi_};
};

// Same ring over a small prime field on flat arrays with lazy reduction.
class PrimeCubicResidueRing {
 public:
  PrimeCubicResidueRing(const CubicX& F, const Poly& v)
      : field_(v.field()), p_(field_->p()), d_(static_cast<size_t>(v.degree())), v_(v.coeffs()), prod_(2 * d_),
        tmp_(d_) {
    for (int i = 0; i < 3; ++i) b_.push_back(padded(F.a[static_cast<size_t>(i)] % v));
  }

  void prepare_phi() {
    // Frobenius columns t^{q j} mod v
    const Poly v(field_, v_);
    std::vector<u64> s = padded(powmod(Poly::t(field_), p_, v));
    frob_.assign(d_ * d_, 0);
    std::vector<u64> cur(d_, 0);
    cur[0] = 1;
    for (size_t j = 0; j < d_; ++j) {
      for (size_t i = 0; i < d_; ++i) frob_[j * d_ + i] = cur[i];
      mulmod(cur.data(), s.data(), cur.data());
    }
    std::vector<u64> X(3 * d_, 0);
    X[d_] = 1;
    xi_ = pow(X, p_);
    xi2_.assign(3 * d_, 0);
    mul(xi_, xi_, xi2_);
  }

  size_t d() const { return d_; }

  std::vector<u64> padded(const Poly& a) const {
    std::vector<u64> r(d_, 0);
    for (size_t i = 0; i < a.coeffs().size() && i < d_; ++i) r[i] = a.coeffs()[i];
    return r;
  }

  // out = a * b mod v (out may alias a or b)
  void mulmod(const u64* a, const u64* b, u64* out) {
    std::fill(prod_.begin(), prod_.end(), 0);
    for (size_t i = 0; i < d_; ++i) {
      const u64 ai = a[i];
      if (!ai) continue;
      for (size_t j = 0; j < d_; ++j) prod_[i + j] += ai * b[j];
    }
    reduce(out);
  }

  // out += a * b mod v
  void muladd(const u64* a, const u64* b, u64* out) {
    mulmod(a, b, tmp_.data());
    for (size_t i = 0; i < d_; ++i) {
      u64 x = out[i] + tmp_[i];
      out[i] = x >= p_ ? x - p_ : x;
    }
  }

  void frob(const u64* a, u64* out) {
    std::fill(prod_.begin(), prod_.begin() + static_cast<long>(d_), 0);
    for (size_t j = 0; j < d_; ++j) {
      const u64 aj = a[j];
      if (!aj) continue;
      const u64* col = &frob_[j * d_];
      for (size_t i = 0; i < d_; ++i) prod_[i] += aj * col[i];
    }
    for (size_t i = 0; i < d_; ++i) out[i] = prod_[i] % p_;
  }

  void mul(const std::vector<u64>& x, const std::vector<u64>& y, std::vector<u64>& out) {
    std::vector<u64> c(5 * d_, 0);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) muladd(&x[i * d_], &y[j * d_], &c[(i + j) * d_]);
    for (size_t k = 4; k >= 3; --k) {
      for (size_t i = 0; i < 3; ++i) {
        mulmod(&c[k * d_], b_[i].data(), tmp2());
        u64* dst = &c[(k - 3 + i) * d_];
        for (size_t t = 0; t < d_; ++t) dst[t] = dst[t] >= scratch_[t] ? dst[t] - scratch_[t] : dst[t] + p_ - scratch_[t];
      }
    }
    out.assign(c.begin(), c.begin() + static_cast<long>(3 * d_));
  }

  std::vector<u64> pow(std::vector<u64> base, u64 k) {
    std::vector<u64> r(3 * d_, 0);
    r[0] = 1;
    while (k) {
      if (k & 1) mul(r, base, r);
      k >>= 1;
      if (k) mul(base, base, base);
    }
    return r;
  }

  // x -> x^q; needs prepare_phi()
  void phi(std::vector<u64>& x) {
    std::vector<u64> f(3 * d_);
    for (size_t i = 0; i < 3; ++i) frob(&x[i * d_], &f[i * d_]);
    std::vector<u64> r(3 * d_, 0);
    std::copy(f.begin(), f.begin() + static_cast<long>(d_), r.begin());
    for (size_t i = 0; i < 3; ++i) {
      muladd(&f[d_], &xi_[i * d_], &r[i * d_]);
      muladd(&f[2 * d_], &xi2_[i * d_], &r[i * d_]);
    }
    x = std::move(r);
  }

  u64 norm(const Poly& a) const { return resultant(Poly(field_, v_), a); }

 private:
  u64* tmp2() {
    scratch_.resize(d_);
    return scratch_.data();
  }

  // reduce prod_ (lazy sums) modulo v into out
  void reduce(u64* out) {
    const size_t n = 2 * d_ - 1;
    for (size_t k = n - 1; k >= d_; --k) {
      const u64 c = prod_[k] % p_;
      if (c) {
        const u64 nc = p_ - c;
        const size_t base = k - d_;
        for (size_t j = 0; j < d_; ++j) prod_[base + j] += nc * v_[j];
      }
      if (k == d_) break;
    }
    for (size_t i = 0; i < d_; ++i) out[i] = prod_[i] % p_;
  }

  FieldPtr field_;
  u64 p_;
  size_t d_;
  std::vector<u64> v_;
  std::vector<u64> prod_, tmp_, scratch_;
  std::vector<std::vector<u64>> b_;
  std::vector<u64> frob_;
  std::vector<u64> xi_, xi2_;
};

}  // namespace detail

struct Classification {
  FrobClass frob;
  PlaceClass place;
};

inline Classification classify_place_generic(const CurveConfig& curve, const Place& v);

/// Frobenius class of the place v. Ramified iff v | disc; otherwise the
/// splitting pattern of F mod v over the residue field: X^{q^d} = X means
/// three roots, and a non-square discriminant means the odd pattern (1,2).
inline Classification classify_place(const CurveConfig& curve, const Place& v) {
  const Poly& pi = v.pi;
  if ((curve.disc % pi).is_zero()) return {FrobClass::Ramified, PlaceClass::Ramified};
  const FieldPtr& fld = curve.field;
  if (fld->is_prime() && fld->p() < (u64{1} << 26) && pi.degree() < 2048) {
    detail::PrimeCubicResidueRing R(curve.F, pi);
    if (!fld->is_square(R.norm(curve.disc))) return {FrobClass::Transposition, PlaceClass::P0};
    R.prepare_phi();
    const size_t d = R.d();
    std::vector<u64> y(3 * d, 0);
    y[d] = 1;
    for (size_t i = 0; i < d; ++i) R.phi(y);
    for (size_t i = 0; i < 3 * d; ++i)
      if (y[i] != (i == d ? 1u : 0u)) return {FrobClass::ThreeCycle, place_class_of(FrobClass::ThreeCycle)};
    return {FrobClass::Identity, place_class_of(FrobClass::Identity)};
  }
  return classify_place_generic(curve, v);
}

/// Reference implementation on Poly arithmetic; valid for every field.
inline Classification classify_place_generic(const CurveConfig& curve, const Place& v) {
  const Poly& pi = v.pi;
  if ((curve.disc % pi).is_zero()) return {FrobClass::Ramified, PlaceClass::Ramified};
  detail::CubicResidueRing R(curve.F, pi);
  const FieldPtr& f = curve.field;
  detail::CubicResidueRing::Elem X{Poly(f), Poly::one(f), Poly(f)};
  detail::CubicResidueRing::Elem y = X;
  for (int i = 0; i < pi.degree(); ++i) y = R.phi(y);
  FrobClass c;
  if (y[0].is_zero() && y[1].is_one() && y[2].is_zero()) {
    c = FrobClass::Identity;
  } else {
    const u64 n = R.norm(curve.disc);
    c = f->is_square(n) ? FrobClass::ThreeCycle : FrobClass::Transposition;
  }
  return {c, place_class_of(c)};
}

// ---------------------------------------------------------------------------
// Density census

inline constexpr std::array<FrobClass, 4> kFrobClasses{FrobClass::Identity, FrobClass::Transposition,
                                                       FrobClass::ThreeCycle, FrobClass::Ramified};

struct DegreeCounts {
  int degree = 0;
  std::array<u64, 4> counts{};  // indexed by FrobClass
  u64 total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
  u64 unramified() const { return counts[0] + counts[1] + counts[2]; }
};

struct DensityCensus {
  std::vector<DegreeCounts> per_degree;
  static constexpr std::array<double, 3> kFrobDensity{1.0 / 6, 1.0 / 2, 1.0 / 3};
  static constexpr std::array<double, 3> kPlaceDensity{5.0 / 6, 0.0, 1.0 / 6};  // P0, P1, P2

  /// Empirical density of an unramified class among unramified places of one degree.
  double density(size_t idx, FrobClass c) const {
    const auto& d = per_degree.at(idx);
    return d.unramified() ? static_cast<double>(d.counts[static_cast<size_t>(c)]) / d.unramified() : 0.0;
  }

  /// Cumulative density over all degrees up to and including per_degree[idx].
  double cumulative_density(size_t idx, FrobClass c) const {
    u64 num = 0, den = 0;
    for (size_t i = 0; i <= idx; ++i) {
      num += per_degree[i].counts[static_cast<size_t>(c)];
      den += per_degree[i].unramified();
    }
    return den ? static_cast<double>(num) / den : 0.0;
  }
};

/// Classifies every monic irreducible of degree <= D.
inline DensityCensus density_census(const CurveConfig& curve, int D, unsigned workers = 1,
                                    u64 budget = kDefaultEnumerationBudget) {
  if (D < 1) throw std::invalid_argument("density_census: D must be >= 1");
  if (workers == 0) workers = 1;
  DensityCensus out;
  for (int d = 1; d <= D; ++d) monic_count_checked(curve.q(), d, budget);
  for (int d = 1; d <= D; ++d) {
    const u64 n = monic_count_checked(curve.q(), d, budget);
    std::vector<std::array<u64, 4>> partial(workers, std::array<u64, 4>{});
    auto job = [&](unsigned w) {
      const u64 begin = n * w / workers, end = n * (w + 1) / workers;
      for_each_monic_in_range(curve.field, d, begin, end, MonicFilter::Irreducible, [&](const Poly& g) {
        auto c = classify_place(curve, Place{g});
        ++partial[w][static_cast<size_t>(c.frob)];
      });
    };
    if (workers == 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(job, w);
      for (auto& t : pool) t.join();
    }
    DegreeCounts dc;
    dc.degree = d;
    for (const auto& p : partial)
      for (size_t k = 0; k < 4; ++k) dc.counts[k] += p[k];
    out.per_degree.push_back(dc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// The 2x2 representation of S_3 over F_ell

using Mat2 = std::array<std::array<long long, 2>, 2>;

struct S3Element {
  std::string name;
  std::array<int, 3> perm;  // i -> perm[i] on {0,1,2}
  Mat2 printed;
};

struct S3RepReport {
  u64 ell = 0;
  std::vector<S3Element> elements;
  std::vector<Mat2> derived;           // matrices from the permutation action on P_i - P_1
  bool printed_matches_action = false;
  bool closed = false;                 // products stay in the set
  bool homomorphism = false;           // rho(s t) = rho(s) rho(t)
  bool isomorphic_to_s3 = false;       // closed, six distinct, faithful homomorphism
  bool no_invariant_line = false;
  bool centralizer_scalar = false;
  std::vector<int> fixed_dims;
  bool all_pass() const {
    return printed_matches_action && closed && homomorphism && isomorphic_to_s3 && no_invariant_line &&
           centralizer_scalar;
  }
};

namespace detail {

inline long long modp(long long a, long long p) { return ((a % p) + p) % p; }

inline Mat2 reduce(Mat2 m, long long p) {
  for (auto& row : m)
    for (auto& x : row) x = modp(x, p);
  return m;
}

inline Mat2 matmul(const Mat2& a, const Mat2& b, long long p) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = modp(a[i][0] * b[0][j] + a[i][1] * b[1][j], p);
  return c;
}

// Rank of a 2x2 matrix over F_p.
inline int rank2(const Mat2& m, long long p) {
  if (m[0][0] == 0 && m[0][1] == 0 && m[1][0] == 0 && m[1][1] == 0) return 0;
  return modp(m[0][0] * m[1][1] - m[0][1] * m[1][0], p) == 0 ? 1 : 2;
}

}  // namespace detail

/// Builds the six matrices on the basis (P_2 - P_1, P_3 - P_1) and checks
/// them against the permutation action and the S_3 structure.
inline S3RepReport s3_representation_checks(u64 ell) {
  if (ell < 5 || !is_prime_u64(ell)) throw std::invalid_argument("s3_representation_checks: ell must be a prime >= 5");
  const long long p = static_cast<long long>(ell);
  S3RepReport rep;
  rep.ell = ell;
  rep.elements = {
      {"()", {0, 1, 2}, Mat2{{{1, 0}, {0, 1}}}},
      {"(1 2)", {1, 0, 2}, Mat2{{{-1, -1}, {0, 1}}}},
      {"(1 3)", {2, 1, 0}, Mat2{{{1, 0}, {-1, -1}}}},
      {"(2 3)", {0, 2, 1}, Mat2{{{0, 1}, {1, 0}}}},
      {"(1 2 3)", {1, 2, 0}, Mat2{{{-1, -1}, {1, 0}}}},
      {"(1 3 2)", {2, 0, 1}, Mat2{{{0, 1}, {-1, -1}}}},
  };
  for (auto& e : rep.elements) e.printed = detail::reduce(e.printed, p);

  // Derived: P_i -> P_{sigma(i)}, coordinates of P_j - P_1 in the basis e_1 = P_2 - P_1, e_2 = P_3 - P_1.
  auto coords = [&](int j, int k) {  // coordinates of P_j - P_k
    std::array<long long, 2> v{0, 0};
    if (j > 0) v[static_cast<size_t>(j - 1)] += 1;
    if (k > 0) v[static_cast<size_t>(k - 1)] -= 1;
    return v;
  };
  rep.printed_matches_action = true;
  for (const auto& e : rep.elements) {
    Mat2 m{};
    for (int col = 0; col < 2; ++col) {
      auto v = coords(e.perm[static_cast<size_t>(col + 1)], e.perm[0]);
      m[0][col] = v[0];
      m[1][col] = v[1];
    }
    m = detail::reduce(m, p);
    rep.derived.push_back(m);
    if (m != e.printed) rep.printed_matches_action = false;
  }

  auto index_of = [&](const Mat2& m) {
    for (size_t i = 0; i < rep.elements.size(); ++i)
      if (rep.elements[i].printed == m) return static_cast<int>(i);
    return -1;
  };
  auto perm_index = [&](const std::array<int, 3>& s) {
    for (size_t i = 0; i < rep.elements.size(); ++i)
      if (rep.elements[i].perm == s) return static_cast<int>(i);
    return -1;
  };
  rep.closed = true;
  rep.homomorphism = true;
  for (const auto& a : rep.elements) {
    for (const auto& b : rep.elements) {
      Mat2 prod = detail::matmul(a.printed, b.printed, p);
      int k = index_of(prod);
      if (k < 0) rep.closed = false;
      std::array<int, 3> comp{a.perm[static_cast<size_t>(b.perm[0])], a.perm[static_cast<size_t>(b.perm[1])],
                              a.perm[static_cast<size_t>(b.perm[2])]};
      if (k != perm_index(comp)) rep.homomorphism = false;
    }
  }
  bool distinct = true;
  for (size_t i = 0; i < rep.elements.size(); ++i)
    for (size_t j = i + 1; j < rep.elements.size(); ++j)
      if (rep.elements[i].printed == rep.elements[j].printed) distinct = false;
  rep.isomorphic_to_s3 = rep.closed && rep.homomorphism && distinct;

  // Invariant lines: every line is spanned by (1, a) or (0, 1).
  rep.no_invariant_line = true;
  auto line_invariant = [&](long long x, long long y) {
    for (const auto& e : rep.elements) {
      const Mat2& m = e.printed;
      long long u = detail::modp(m[0][0] * x + m[0][1] * y, p);
      long long w = detail::modp(m[1][0] * x + m[1][1] * y, p);
      if (detail::modp(u * y - w * x, p) != 0) return false;
    }
    return true;
  };
  if (line_invariant(0, 1)) rep.no_invariant_line = false;
  for (long long a = 0; a < p; ++a)
    if (line_invariant(1, a)) rep.no_invariant_line = false;

  // Centralizer: exhaustive over M_2(F_ell).
  rep.centralizer_scalar = true;
  for (long long a = 0; a < p && rep.centralizer_scalar; ++a)
    for (long long b = 0; b < p; ++b)
      for (long long c = 0; c < p; ++c)
        for (long long d = 0; d < p; ++d) {
          Mat2 x{{{a, b}, {c, d}}};
          bool commutes = true;
          for (const auto& e : rep.elements)
            if (detail::matmul(x, e.printed, p) != detail::matmul(e.printed, x, p)) {
              commutes = false;
              break;
            }
          if (commutes && !(b == 0 && c == 0 && a == d)) rep.centralizer_scalar = false;
        }

  for (const auto& e : rep.elements) {
    Mat2 m = e.printed;
    m[0][0] = detail::modp(m[0][0] - 1, p);
    m[1][1] = detail::modp(m[1][1] - 1, p);
    rep.fixed_dims.push_back(2 - detail::rank2(m, p));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Effective Chebotarev

/// (2|C|)/(n|G|) [(|G|+g_L) q^{n/2} + |G|(2g_K+1) q^{n/4} + (|G|+g_L)], nudged up by one ulp.
inline long double chebotarev_bound(long G_order, long C_size, long g_L, long g_K, u64 q, int n) {
  if (G_order <= 0 || C_size <= 0 || n <= 0 || C_size > G_order)
    throw std::invalid_argument("chebotarev_bound: invalid sizes");
  const long double G = G_order, C = C_size, gl = g_L, gk = g_K, Q = static_cast<long double>(q);
  const long double h = std::pow(Q, n / 2.0L), qq = std::pow(Q, n / 4.0L);
  long double v = (2 * C) / (n * G) * ((G + gl) * h + G * (2 * gk + 1) * qq + (G + gl));
  return std::nextafter(v, std::numeric_limits<long double>::infinity());
}

struct RatioBound {
  bool condition_met = false;
  long double bound = std::numeric_limits<long double>::infinity();
  long double simplified = std::numeric_limits<long double>::infinity();
  double n_threshold = 0;  // simplified form is valid for n at or above this
  bool simplified_valid = false;
};

inline RatioBound chebotarev_ratio_bound(long G_order, long S_size, long Sprime_size, long g_L, long g_K, u64 q,
                                         int n) {
  if (G_order <= 0 || S_size <= 0 || Sprime_size <= 0 || n <= 0)
    throw std::invalid_argument("chebotarev_ratio_bound: sizes must be positive");
  RatioBound r;
  const long double c = G_order + g_L + 2.0L * g_K;
  const long double Q = static_cast<long double>(q);
  const long double ratio = static_cast<long double>(S_size) / Sprime_size;
  const long double den = std::pow(Q, n / 2.0L) - std::pow(Q, n / 4.0L) - 2 * c;
  r.condition_met = den > 0;
  if (r.condition_met) r.bound = std::nextafter(4 * ratio * c / den, std::numeric_limits<long double>::infinity());
  r.simplified = std::nextafter(16 * ratio * c * std::pow(Q, -n / 2.0L), std::numeric_limits<long double>::infinity());
  r.n_threshold = static_cast<double>(2 * (std::log(8.0L) + std::log(c)) / std::log(Q));
  r.simplified_valid = n >= r.n_threshold;
  return r;
}

struct AuditRow {
  int degree;
  FrobClass cls;
  u64 observed;
  long double expected;  // (|C|/|G|) q^n / n
  long double bound;
  bool pass;
  // ratio form with S' = G: density deviation and its bound (when condition_met)
  double density;
  RatioBound ratio;
  bool density_pass;
};

inline std::vector<AuditRow> chebotarev_audit(const CurveConfig& curve, const DensityCensus& census) {
  std::vector<AuditRow> rows;
  const long G = 6;
  for (size_t i = 0; i < census.per_degree.size(); ++i) {
    const auto& dc = census.per_degree[i];
    for (FrobClass c : {FrobClass::Identity, FrobClass::Transposition, FrobClass::ThreeCycle}) {
      AuditRow row{};
      row.degree = dc.degree;
      row.cls = c;
      row.observed = dc.counts[static_cast<size_t>(c)];
      row.expected = static_cast<long double>(class_size(c)) / G *
                     std::pow(static_cast<long double>(curve.q()), dc.degree) / dc.degree;
      row.bound = chebotarev_bound(G, class_size(c), curve.genus_L_bound, 0, curve.q(), dc.degree);
      row.pass = std::fabs(static_cast<long double>(row.observed) - row.expected) <= row.bound;
      row.density = census.density(i, c);
      row.ratio = chebotarev_ratio_bound(G, class_size(c), G, curve.genus_L_bound, 0, curve.q(), dc.degree);
      row.density_pass = !row.ratio.condition_met ||
                         std::fabs(row.density - static_cast<double>(class_size(c)) / G) < row.ratio.bound;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::vector<AuditRow> chebotarev_audit(const CurveConfig& curve, int D, unsigned workers = 1,
                                              u64 budget = kDefaultEnumerationBudget) {
  return chebotarev_audit(curve, density_census(curve, D, workers, budget));
}

}  // namespace supertwist
