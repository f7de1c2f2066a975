#pragma once

// Exact arithmetic in F_q and F_q[t]: field operations, polynomial ring
// operations, irreducibility, factorization, counting, enumeration and
// uniform sampling of monic polynomials, plus the discriminant of a cubic
// in x whose coefficients live in F_q[t].

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supertwist/numeric.hpp"
#include "supertwist/random.hpp"

namespace supertwist {

/// Raised when an exhaustive enumeration would exceed its configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid (ell, q, p, curve) configurations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr u64 kDefaultEnumerationBudget = u64{1} << 24;

struct FieldSpec {
  u64 p = 0;
  unsigned e = 1;
  std::vector<u64> modulus;  // monic, low-to-high, degree e; empty when e == 1

  u64 q() const {
    u64 r = 1;
    for (unsigned i = 0; i < e; ++i) r *= p;
    return r;
  }
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

class Field;
using FieldPtr = std::shared_ptr<const Field>;

/// F_q with q = p^e. Elements are canonical integer representatives in
/// [0, q): for e == 1 the residue mod p, otherwise the base-p digits are the
/// coefficients of the residue polynomial modulo `spec.modulus`.
class Field {
 public:
  static FieldPtr prime(u64 p) {
    if (!is_prime_u64(p)) throw std::invalid_argument("field characteristic must be prime");
    if (p >= (u64{1} << 32)) throw std::invalid_argument("characteristic must be below 2^32");
    return FieldPtr(new Field(FieldSpec{p, 1, {}}));
  }

  /// q = p^e with an explicit monic irreducible modulus of degree e over F_p.
  static FieldPtr make(const FieldSpec& spec);

  const FieldSpec& spec() const { return spec_; }
  u64 p() const { return spec_.p; }
  unsigned e() const { return spec_.e; }
  u64 q() const { return q_; }
  bool is_prime() const { return spec_.e == 1; }

  u64 from_int(long long v) const {
    long long r = v % static_cast<long long>(spec_.p);
    if (r < 0) r += static_cast<long long>(spec_.p);
    return static_cast<u64>(r);
  }

  u64 add(u64 a, u64 b) const {
    if (is_prime()) {
      u64 s = a + b;
      return s >= q_ ? s - q_ : s;
    }
    u64 r = 0, scale = 1;
    for (unsigned i = 0; i < spec_.e; ++i) {
      u64 da = a % spec_.p, db = b % spec_.p;
      a /= spec_.p;
      b /= spec_.p;
      r += ((da + db) % spec_.p) * scale;
      scale *= spec_.p;
    }
    return r;
  }

  u64 neg(u64 a) const {
    if (is_prime()) return a == 0 ? 0 : q_ - a;
    u64 r = 0, scale = 1;
    for (unsigned i = 0; i < spec_.e; ++i) {
      u64 da = a % spec_.p;
      a /= spec_.p;
      r += ((spec_.p - da) % spec_.p) * scale;
      scale *= spec_.p;
    }
    return r;
  }

  u64 sub(u64 a, u64 b) const { return add(a, neg(b)); }

  u64 mul(u64 a, u64 b) const {
    if (is_prime()) return a * b % q_;
    if (a == 0 || b == 0) return 0;
    u64 s = log_[a] + log_[b];
    if (s >= q_ - 1) s -= q_ - 1;
    return exp_[s];
  }

  u64 inv(u64 a) const {
    if (a == 0) throw std::domain_error("division by zero in F_q");
    if (is_prime()) return pow(a, q_ - 2);
    return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
  }

  u64 div(u64 a, u64 b) const { return mul(a, inv(b)); }

  u64 pow(u64 a, u64 k) const {
    u64 r = 1;
    while (k) {
      if (k & 1) r = mul(r, a);
      a = mul(a, a);
      k >>= 1;
    }
    return r;
  }

  bool is_square(u64 a) const {
    if (a == 0 || spec_.p == 2) return true;
    return pow(a, (q_ - 1) / 2) == 1;
  }

  /// Smallest canonical representative of a generator of F_q^*.
  u64 primitive_root() const {
    if (q_ == 2) return 1;
    const auto primes = distinct_prime_factors(q_ - 1);
    for (u64 g = 2; g < q_; ++g) {
      bool ok = true;
      for (u64 r : primes) {
        if (pow(g, (q_ - 1) / r) == 1) {
          ok = false;
          break;
        }
      }
      if (ok) return g;
    }
    throw std::logic_error("no primitive root found");
  }

  /// p-th root (Frobenius inverse): a^{q/p}.
  u64 pth_root(u64 a) const { return pow(a, q_ / spec_.p); }

  bool same_as(const Field& other) const { return this == &other || spec_ == other.spec_; }

 private:
  explicit Field(FieldSpec spec) : spec_(std::move(spec)), q_(spec_.q()) {}

  // Multiplication in F_p[x]/(modulus) on encoded digits, used to build tables.
  u64 slow_mul(u64 a, u64 b) const;

  FieldSpec spec_;
  u64 q_;
  std::vector<u64> log_;
  std::vector<u64> exp_;
};

// ---------------------------------------------------------------------------
// Field elements

enum class ArithOp { Add, Sub, Mul, Div };

class FieldElem {
 public:
  FieldElem(FieldPtr field, u64 rep) : field_(std::move(field)), rep_(rep) {
    if (rep_ >= field_->q()) throw std::invalid_argument("field element representative out of range");
  }
  static FieldElem from_int(const FieldPtr& f, long long v) { return {f, f->from_int(v)}; }

  u64 rep() const { return rep_; }
  const FieldPtr& field() const { return field_; }
  bool is_zero() const { return rep_ == 0; }

  friend FieldElem operator+(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return {a.field_, a.field_->add(a.rep_, b.rep_)};
  }
  friend FieldElem operator-(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return {a.field_, a.field_->sub(a.rep_, b.rep_)};
  }
  friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return {a.field_, a.field_->mul(a.rep_, b.rep_)};
  }
  friend FieldElem operator/(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return {a.field_, a.field_->div(a.rep_, b.rep_)};
  }
  friend bool operator==(const FieldElem& a, const FieldElem& b) {
    return a.field_->same_as(*b.field_) && a.rep_ == b.rep_;
  }

 private:
  static void check(const FieldElem& a, const FieldElem& b) {
    if (!a.field_->same_as(*b.field_)) throw std::invalid_argument("mismatched FieldSpec");
  }
  FieldPtr field_;
  u64 rep_;
};

inline FieldElem field_arith(const FieldElem& a, const FieldElem& b, ArithOp op) {
  switch (op) {
    case ArithOp::Add: return a + b;
    case ArithOp::Sub: return a - b;
    case ArithOp::Mul: return a * b;
    case ArithOp::Div: return a / b;
  }
  throw std::invalid_argument("unknown op");
}

// ---------------------------------------------------------------------------
// Polynomials

inline constexpr int kZeroDegree = -1;

/// Element of F_q[t]; coefficients low-to-high with no trailing zeros.
class Poly {
 public:
  explicit Poly(FieldPtr field) : field_(std::move(field)) {}
  Poly(FieldPtr field, std::vector<u64> coeffs) : field_(std::move(field)), c_(std::move(coeffs)) {
    for (u64 v : c_)
      if (v >= field_->q()) throw std::invalid_argument("coefficient out of range");
    trim();
  }
  /// Coefficients given as signed integers, reduced into the prime subfield.
  static Poly from_ints(const FieldPtr& f, std::initializer_list<long long> coeffs) {
    std::vector<u64> c;
    for (long long v : coeffs) c.push_back(f->from_int(v));
    return Poly(f, std::move(c));
  }
  static Poly constant(const FieldPtr& f, u64 c) { return Poly(f, std::vector<u64>{c}); }
  static Poly one(const FieldPtr& f) { return constant(f, 1); }
  static Poly monomial(const FieldPtr& f, u64 c, int deg) {
    std::vector<u64> v(static_cast<size_t>(deg) + 1, 0);
    v.back() = c;
    return Poly(f, std::move(v));
  }
  static Poly t(const FieldPtr& f) { return monomial(f, 1, 1); }

  const FieldPtr& field() const { return field_; }
  const std::vector<u64>& coeffs() const { return c_; }
  std::vector<u64>& mutable_coeffs() { return c_; }

  int degree() const { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_one() const { return c_.size() == 1 && c_[0] == 1; }
  bool is_constant() const { return c_.size() <= 1; }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }
  u64 lead() const { return c_.empty() ? 0 : c_.back(); }
  u64 coeff(size_t i) const { return i < c_.size() ? c_[i] : 0; }

  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.field_->same_as(*b.field_) && a.c_ == b.c_;
  }

  std::string to_string() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
      u64 c = c_[static_cast<size_t>(i)];
      if (c == 0) continue;
      if (!first) os << " + ";
      first = false;
      if (c != 1 || i == 0) os << c;
      if (i >= 1) os << "t";
      if (i >= 2) os << "^" << i;
    }
    return os.str();
  }

 private:
  FieldPtr field_;
  std::vector<u64> c_;
};

namespace detail {

inline void require_same(const Poly& a, const Poly& b) {
  if (!a.field()->same_as(*b.field())) throw std::invalid_argument("mismatched FieldSpec");
}

// c += a * b on raw coefficient vectors (c sized a.size()+b.size()-1).
inline std::vector<u64> mul_raw(const Field& f, const std::vector<u64>& a, const std::vector<u64>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<u64> c(a.size() + b.size() - 1, 0);
  if (f.is_prime()) {
    const u64 p = f.p();
    // Accumulate lazily; each product is < p^2 and we reduce before overflow.
    const u64 max_terms = (~u64{0}) / ((p - 1) * (p - 1) + 1);
    if (max_terms >= std::min(a.size(), b.size())) {
      for (size_t i = 0; i < c.size(); ++i) {
        size_t lo = i >= b.size() - 1 ? i - (b.size() - 1) : 0;
        size_t hi = std::min(i, a.size() - 1);
        u64 acc = 0;
        for (size_t j = lo; j <= hi; ++j) acc += a[j] * b[i - j];
        c[i] = acc % p;
      }
    } else {
      for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j] % p) % p;
      }
    }
    return c;
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < b.size(); ++j) c[i + j] = f.add(c[i + j], f.mul(a[i], b[j]));
  }
  return c;
}

// In-place remainder of `r` modulo a monic polynomial `m` (raw vectors).
inline void rem_monic_raw(const Field& f, std::vector<u64>& r, const std::vector<u64>& m) {
  const size_t dm = m.size() - 1;
  while (!r.empty() && r.back() == 0) r.pop_back();
  if (r.size() <= dm) return;
  if (f.is_prime() && f.p() < (u64{1} << 26) && r.size() < 4096) {
    // lazy reduction: every slot stays below size * p^2 < 2^64
    const u64 p = f.p();
    for (size_t k = r.size() - 1; k >= dm; --k) {
      const u64 c = r[k] % p;
      if (c != 0) {
        const u64 nc = p - c;
        const size_t base = k - dm;
        for (size_t j = 0; j < dm; ++j) r[base + j] += nc * m[j];
      }
      r[k] = 0;
      if (k == dm) break;
    }
    for (size_t j = 0; j < dm; ++j) r[j] %= p;
  } else if (f.is_prime()) {
    const u64 p = f.p();
    for (size_t k = r.size() - 1; k >= dm; --k) {
      u64 c = r[k];
      if (c != 0) {
        const u64 nc = p - c;
        const size_t base = k - dm;
        for (size_t j = 0; j < dm; ++j) r[base + j] = (r[base + j] + nc * m[j]) % p;
      }
      r[k] = 0;
      if (k == dm) break;
    }
  } else {
    for (size_t k = r.size() - 1; k >= dm; --k) {
      u64 c = r[k];
      if (c != 0) {
        const size_t base = k - dm;
        for (size_t j = 0; j < dm; ++j) r[base + j] = f.sub(r[base + j], f.mul(c, m[j]));
      }
      r[k] = 0;
      if (k == dm) break;
    }
  }
  r.resize(dm);
  while (!r.empty() && r.back() == 0) r.pop_back();
}

}  // namespace detail

inline Poly operator+(const Poly& a, const Poly& b) {
  detail::require_same(a, b);
  const Field& f = *a.field();
  std::vector<u64> c(std::max(a.coeffs().size(), b.coeffs().size()), 0);
  for (size_t i = 0; i < c.size(); ++i) c[i] = f.add(a.coeff(i), b.coeff(i));
  return Poly(a.field(), std::move(c));
}

inline Poly operator-(const Poly& a) {
  std::vector<u64> c(a.coeffs());
  for (auto& v : c) v = a.field()->neg(v);
  return Poly(a.field(), std::move(c));
}

inline Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

inline Poly operator*(const Poly& a, const Poly& b) {
  detail::require_same(a, b);
  return Poly(a.field(), detail::mul_raw(*a.field(), a.coeffs(), b.coeffs()));
}

inline Poly scale(const Poly& a, u64 c) {
  std::vector<u64> v(a.coeffs());
  for (auto& x : v) x = a.field()->mul(x, c);
  return Poly(a.field(), std::move(v));
}

inline Poly make_monic(const Poly& a) {
  if (a.is_zero() || a.is_monic()) return a;
  return scale(a, a.field()->inv(a.lead()));
}

/// Quotient and remainder; throws std::domain_error for a zero divisor.
inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  detail::require_same(a, b);
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  const Field& f = *a.field();
  if (a.degree() < b.degree()) return {Poly(a.field()), a};
  std::vector<u64> r = a.coeffs();
  const std::vector<u64>& m = b.coeffs();
  const size_t dm = m.size() - 1;
  const u64 inv_lead = f.inv(b.lead());
  std::vector<u64> q(r.size() - dm, 0);
  for (size_t k = r.size() - 1;; --k) {
    u64 c = f.mul(r[k], inv_lead);
    q[k - dm] = c;
    if (c != 0) {
      for (size_t j = 0; j <= dm; ++j) r[k - dm + j] = f.sub(r[k - dm + j], f.mul(c, m[j]));
    }
    if (k == dm) break;
  }
  r.resize(dm);
  return {Poly(a.field(), std::move(q)), Poly(a.field(), std::move(r))};
}

inline Poly operator%(const Poly& a, const Poly& b) {
  detail::require_same(a, b);
  if (b.is_zero()) throw std::domain_error("polynomial modulus is zero");
  if (b.is_monic()) {
    std::vector<u64> r = a.coeffs();
    detail::rem_monic_raw(*a.field(), r, b.coeffs());
    return Poly(a.field(), std::move(r));
  }
  return divmod(a, b).second;
}

inline Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }

/// Monic gcd (zero when both inputs are zero).
inline Poly gcd(Poly a, Poly b) {
  detail::require_same(a, b);
  while (!b.is_zero()) {
    b = make_monic(b);
    Poly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(a);
}

inline Poly mulmod(const Poly& a, const Poly& b, const Poly& m) {
  if (m.is_monic()) {
    std::vector<u64> r = detail::mul_raw(*a.field(), a.coeffs(), b.coeffs());
    detail::rem_monic_raw(*a.field(), r, m.coeffs());
    return Poly(a.field(), std::move(r));
  }
  return (a * b) % m;
}

inline Poly powmod(const Poly& base, u64 exponent, const Poly& m) {
  if (m.is_zero()) throw std::domain_error("powmod with zero modulus");
  Poly result = Poly::one(base.field()) % m;
  Poly b = base % m;
  while (exponent) {
    if (exponent & 1) result = mulmod(result, b, m);
    exponent >>= 1;
    if (exponent) b = mulmod(b, b, m);
  }
  return result;
}

inline Poly powmod(const Poly& base, const BigInt& exponent, const Poly& m) {
  if (m.is_zero()) throw std::domain_error("powmod with zero modulus");
  if (exponent < 0) throw std::invalid_argument("negative exponent");
  Poly result = Poly::one(base.field()) % m;
  if (exponent == 0) return result;
  Poly b = base % m;
  const unsigned top = boost::multiprecision::msb(exponent);
  for (unsigned i = top + 1; i-- > 0;) {
    result = mulmod(result, result, m);
    if (boost::multiprecision::bit_test(exponent, i)) result = mulmod(result, b, m);
  }
  return result;
}

inline Poly derivative(const Poly& a) {
  if (a.degree() <= 0) return Poly(a.field());
  const Field& f = *a.field();
  std::vector<u64> c(a.coeffs().size() - 1);
  for (size_t i = 1; i < a.coeffs().size(); ++i) c[i - 1] = f.mul(a.coeffs()[i], f.from_int(static_cast<long long>(i % f.p())));
  return Poly(a.field(), std::move(c));
}

inline u64 eval(const Poly& a, u64 x) {
  const Field& f = *a.field();
  u64 r = 0;
  for (size_t i = a.coeffs().size(); i-- > 0;) r = f.add(f.mul(r, x), a.coeffs()[i]);
  return r;
}

/// Res(a, b) = lead(a)^{deg b} * prod_{a(x)=0} b(x); zero if either is zero.
inline u64 resultant(Poly a, Poly b) {
  const Field& f = *a.field();
  if (a.is_zero() || b.is_zero()) return 0;
  u64 acc = 1;
  while (b.degree() > 0) {
    const int m = a.degree(), n = b.degree();
    Poly r = a % b;
    if (r.is_zero()) return 0;
    if ((m & 1) && (n & 1)) acc = f.neg(acc);
    acc = f.mul(acc, f.pow(b.lead(), static_cast<u64>(m - r.degree())));
    a = std::move(b);
    b = std::move(r);
  }
  return f.mul(acc, f.pow(b.lead(), static_cast<u64>(std::max(a.degree(), 0))));
}

enum class PolyOp { Add, Mul, Mod, Gcd, PowMod };

/// Dispatcher over the ring operations; `exponent` is used by PowMod (f^exponent mod g).
inline Poly poly_arith(const Poly& f, const Poly& g, PolyOp op, const BigInt& exponent = 0) {
  switch (op) {
    case PolyOp::Add: return f + g;
    case PolyOp::Mul: return f * g;
    case PolyOp::Mod: return f % g;
    case PolyOp::Gcd: return gcd(f, g);
    case PolyOp::PowMod: return powmod(f, exponent, g);
  }
  throw std::invalid_argument("unknown op");
}

/// Canonical total order: by degree, then coefficients from the top down.
inline bool canonical_less(const Poly& a, const Poly& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  for (size_t i = a.coeffs().size(); i-- > 0;) {
    if (a.coeffs()[i] != b.coeffs()[i]) return a.coeffs()[i] < b.coeffs()[i];
  }
  return false;
}

// ---------------------------------------------------------------------------
// Irreducibility and factorization

/// Ben-Or irreducibility test; deterministic.
inline bool is_irreducible(const Poly& f_in) {
  if (f_in.degree() < 1) throw std::invalid_argument("is_irreducible: constant or zero input");
  const Poly f = make_monic(f_in);
  const int n = f.degree();
  if (n == 1) return true;
  const FieldPtr& fld = f.field();
  const Poly t = Poly::t(fld) % f;
  Poly h = t;
  for (int i = 1; i <= n / 2; ++i) {
    h = powmod(h, fld->q(), f);
    if (!gcd(f, h - t).is_one()) return false;
  }
  return true;
}

struct Factorization {
  FieldElem unit;
  std::vector<std::pair<Poly, int>> factors;  // monic irreducible, multiplicity >= 1

  Poly expand() const {
    Poly r = Poly::constant(unit.field(), unit.rep());
    for (const auto& [g, m] : factors)
      for (int i = 0; i < m; ++i) r = r * g;
    return r;
  }
  size_t distinct() const { return factors.size(); }
};

namespace detail {

// p-th root of a polynomial whose derivative vanishes.
inline Poly poly_pth_root(const Poly& a) {
  const Field& f = *a.field();
  const u64 p = f.p();
  std::vector<u64> c;
  for (size_t i = 0; i < a.coeffs().size(); i += p) c.push_back(f.pth_root(a.coeffs()[i]));
  return Poly(a.field(), std::move(c));
}

// Square-free factorization of a monic polynomial: (part, multiplicity).
inline std::vector<std::pair<Poly, int>> squarefree(const Poly& f) {
  std::vector<std::pair<Poly, int>> out;
  if (f.degree() < 1) return out;
  const int p = static_cast<int>(f.field()->p());
  Poly c = gcd(f, derivative(f));
  Poly w = f / c;
  int i = 1;
  while (!w.is_one()) {
    Poly y = gcd(w, c);
    Poly fac = w / y;
    if (fac.degree() > 0) out.emplace_back(make_monic(fac), i);
    w = y;
    c = c / y;
    ++i;
  }
  if (!c.is_one() && c.degree() > 0) {
    for (auto& [g, m] : squarefree(make_monic(poly_pth_root(make_monic(c))))) out.emplace_back(g, m * p);
  }
  return out;
}

// Distinct-degree split of a monic squarefree polynomial: (product, degree).
inline std::vector<std::pair<Poly, int>> distinct_degree(Poly g) {
  std::vector<std::pair<Poly, int>> out;
  const FieldPtr& fld = g.field();
  const Poly t = Poly::t(fld);
  Poly h = t % g;
  for (int i = 1; g.degree() >= 2 * i; ++i) {
    h = powmod(h, fld->q(), g);
    Poly d = gcd(g, h - t);
    if (!d.is_one()) {
      out.emplace_back(d, i);
      g = g / d;
      h = h % g;
    }
  }
  if (g.degree() > 0) out.emplace_back(g, g.degree());
  return out;
}

inline Poly random_below(const FieldPtr& f, int deg, RandomStream& rng) {
  std::vector<u64> c(static_cast<size_t>(deg));
  for (auto& v : c) v = rng.uniform(f->q());
  return Poly(f, std::move(c));
}

// Splitting element whose gcd with g separates degree-d factors.
inline Poly splitting_element(const Poly& a, const Poly& g, int d) {
  const Field& f = *g.field();
  const u64 q = f.q();
  if (f.p() != 2) {
    // a^{(q^d-1)/2} = (prod_{i<d} a^{q^i})^{(q-1)/2}
    Poly norm = a;
    Poly frob = a;
    for (int i = 1; i < d; ++i) {
      frob = powmod(frob, q, g);
      norm = mulmod(norm, frob, g);
    }
    return powmod(norm, (q - 1) / 2, g) - Poly::one(g.field());
  }
  // Characteristic 2: absolute trace sum_{i < e*d} a^{2^i}.
  Poly tr = a;
  Poly cur = a;
  const int steps = static_cast<int>(f.e()) * d;
  for (int i = 1; i < steps; ++i) {
    cur = mulmod(cur, cur, g);
    tr = tr + cur;
  }
  return tr;
}

inline void equal_degree(const Poly& g, int d, RandomStream& rng, std::vector<Poly>& out) {
  if (g.degree() == d) {
    out.push_back(g);
    return;
  }
  for (;;) {
    Poly a = random_below(g.field(), g.degree(), rng);
    if (a.degree() < 1) continue;
    Poly u = gcd(g, splitting_element(a, g, d));
    if (u.degree() > 0 && u.degree() < g.degree()) {
      equal_degree(u, d, rng, out);
      equal_degree(g / u, d, rng, out);
      return;
    }
  }
}

}  // namespace detail

/// Complete factorization into monic irreducibles. The result is sorted
/// canonically and does not depend on the random stream.
inline Factorization factor(const Poly& f, RandomStream& rng) {
  if (f.is_zero()) throw std::invalid_argument("factor: zero polynomial");
  Factorization out{FieldElem(f.field(), f.lead()), {}};
  const Poly m = make_monic(f);
  for (const auto& [part, mult] : detail::squarefree(m)) {
    for (const auto& [prod, deg] : detail::distinct_degree(part)) {
      std::vector<Poly> irr;
      detail::equal_degree(prod, deg, rng, irr);
      for (auto& g : irr) out.factors.emplace_back(std::move(g), mult);
    }
  }
  std::sort(out.factors.begin(), out.factors.end(),
            [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
  return out;
}

// ---------------------------------------------------------------------------
// Counting, enumeration, sampling

inline int mobius(int n) {
  int result = 1;
  for (int d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      n /= d;
      if (n % d == 0) return 0;
      result = -result;
    }
  }
  if (n > 1) result = -result;
  return result;
}

/// Number of monic irreducibles of degree d over F_q (necklace formula).
inline BigInt count_monic_irreducibles(u64 q, int d) {
  if (d < 1) throw std::invalid_argument("count_monic_irreducibles: degree must be >= 1");
  BigInt total = 0;
  for (int k = 1; k <= d; ++k) {
    if (d % k != 0) continue;
    int mu = mobius(k);
    if (mu == 0) continue;
    BigInt term = big_pow(BigInt(q), static_cast<unsigned>(d / k));
    total += mu > 0 ? term : BigInt(-term);
  }
  return total / d;
}

enum class MonicFilter { All, Irreducible };

inline u64 monic_count_checked(u64 q, int d, u64 budget) {
  BigInt n = big_pow(BigInt(q), static_cast<unsigned>(d));
  if (n > BigInt(budget))
    throw BudgetExceeded("enumeration of q^d = " + n.str() + " monic polynomials exceeds budget; use sampling");
  return static_cast<u64>(n);
}

/// Visits monic polynomials of degree d whose index lies in [begin, end).
/// Index i encodes the non-leading coefficients as base-q digits (c_0 lowest),
/// so increasing index is lexicographic order on (c_{d-1}, ..., c_0).
template <class Visitor>
void for_each_monic_in_range(const FieldPtr& f, int d, u64 begin, u64 end, MonicFilter filter, Visitor&& visit) {
  const u64 q = f->q();
  std::vector<u64> c(static_cast<size_t>(d) + 1, 0);
  c[static_cast<size_t>(d)] = 1;
  u64 idx = begin;
  for (int j = 0; j < d; ++j) {
    c[static_cast<size_t>(j)] = idx % q;
    idx /= q;
  }
  for (u64 i = begin; i < end; ++i) {
    Poly g(f, c);
    if (filter == MonicFilter::All || is_irreducible(g)) visit(g);
    for (int j = 0; j < d; ++j) {
      if (++c[static_cast<size_t>(j)] < q) break;
      c[static_cast<size_t>(j)] = 0;
    }
  }
}

template <class Visitor>
void for_each_monic(const FieldPtr& f, int d, MonicFilter filter, Visitor&& visit,
                    u64 budget = kDefaultEnumerationBudget) {
  if (d < 1) throw std::invalid_argument("enumerate_monic: degree must be >= 1");
  const u64 n = monic_count_checked(f->q(), d, budget);
  for_each_monic_in_range(f, d, 0, n, filter, std::forward<Visitor>(visit));
}

inline std::vector<Poly> enumerate_monic(const FieldPtr& f, int d, MonicFilter filter,
                                         u64 budget = kDefaultEnumerationBudget) {
  std::vector<Poly> out;
  for_each_monic(f, d, filter, [&](const Poly& g) { out.push_back(g); }, budget);
  return out;
}

/// Uniform monic polynomial of degree n.
inline Poly sample_monic(const FieldPtr& f, int n, RandomStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_monic: degree must be >= 1");
  std::vector<u64> c(static_cast<size_t>(n) + 1);
  for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = rng.uniform(f->q());
  c[static_cast<size_t>(n)] = 1;
  return Poly(f, std::move(c));
}

// ---------------------------------------------------------------------------
// Cubics in x over F_q[t]

/// F(x) = a[3] x^3 + a[2] x^2 + a[1] x + a[0] with a[i] in F_q[t].
struct CubicX {
  std::array<Poly, 4> a;

  const FieldPtr& field() const { return a[3].field(); }
  bool is_monic() const { return a[3].is_one(); }
};

inline CubicX make_cubic(const Poly& a0, const Poly& a1, const Poly& a2) {
  return CubicX{{a0, a1, a2, Poly::one(a0.field())}};
}

/// disc = 18abcd - 4b^3 d + b^2 c^2 - 4 a c^3 - 27 a^2 d^2 for a x^3 + b x^2 + c x + d.
inline Poly discriminant_cubic(const CubicX& F) {
  if (F.a[3].is_zero()) throw std::invalid_argument("discriminant_cubic: not a cubic in x");
  const FieldPtr& f = F.field();
  const Poly& a = F.a[3];
  const Poly& b = F.a[2];
  const Poly& c = F.a[1];
  const Poly& d = F.a[0];
  auto k = [&](long long v) { return Poly::constant(f, f->from_int(v)); };
  return k(18) * a * b * c * d - k(4) * b * b * b * d + b * b * c * c - k(4) * a * c * c * c -
         k(27) * a * a * d * d;
}

// ---------------------------------------------------------------------------
// Extension-field construction (needs the polynomial machinery above)

inline u64 Field::slow_mul(u64 a, u64 b) const {
  const u64 p = spec_.p;
  const unsigned e = spec_.e;
  std::vector<u64> da(e), db(e);
  for (unsigned i = 0; i < e; ++i) {
    da[i] = a % p;
    a /= p;
    db[i] = b % p;
    b /= p;
  }
  std::vector<u64> prod(2 * e, 0);
  for (unsigned i = 0; i < e; ++i)
    for (unsigned j = 0; j < e; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
  for (unsigned k = 2 * e - 1; k >= e; --k) {
    u64 c = prod[k];
    if (c) {
      for (unsigned j = 0; j < e; ++j) prod[k - e + j] = (prod[k - e + j] + (p - c) * spec_.modulus[j]) % p;
    }
    prod[k] = 0;
  }
  u64 r = 0;
  for (unsigned i = e; i-- > 0;) r = r * p + prod[i];
  return r;
}

inline FieldPtr Field::make(const FieldSpec& spec) {
  if (spec.e == 1) {
    if (!spec.modulus.empty()) throw std::invalid_argument("prime field takes no modulus");
    return prime(spec.p);
  }
  if (spec.e == 0) throw std::invalid_argument("extension exponent must be >= 1");
  auto base = prime(spec.p);
  if (spec.modulus.size() != spec.e + 1 || spec.modulus.back() != 1)
    throw std::invalid_argument("modulus must be monic of degree e");
  {
    BigInt q = big_pow(BigInt(spec.p), spec.e);
    if (q > BigInt(u64{1} << 20)) throw std::invalid_argument("extension fields limited to q <= 2^20");
  }
  if (!is_irreducible(Poly(base, spec.modulus))) throw std::invalid_argument("modulus is not irreducible over F_p");
  auto* fld = new Field(spec);
  const u64 q = fld->q_;
  fld->log_.assign(q, 0);
  fld->exp_.assign(q - 1, 0);
  const auto primes = distinct_prime_factors(q - 1);
  auto slow_pow = [&](u64 a, u64 k) {
    u64 r = 1;
    while (k) {
      if (k & 1) r = fld->slow_mul(r, a);
      a = fld->slow_mul(a, a);
      k >>= 1;
    }
    return r;
  };
  u64 g = 0;
  for (u64 cand = 2; cand < q; ++cand) {
    bool ok = true;
    for (u64 r : primes)
      if (slow_pow(cand, (q - 1) / r) == 1) {
        ok = false;
        break;
      }
    if (ok) {
      g = cand;
      break;
    }
  }
  if (g == 0) throw std::logic_error("no generator for extension field");
  u64 x = 1;
  for (u64 i = 0; i < q - 1; ++i) {
    fld->exp_[i] = x;
    fld->log_[x] = i;
    x = fld->slow_mul(x, g);
  }
  return FieldPtr(fld);
}

}  // namespace supertwist
