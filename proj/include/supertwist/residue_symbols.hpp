#pragma once

// ell-th roots of unity in F_q, the ell-th power residue symbol on F_q[t],
// its multiplicative extension to composite moduli, and the joint-symbol
// census over places of a fixed degree.

#include <optional>
#include <unordered_map>
#include <vector>

#include "supertwist/ff_poly.hpp"
#include "supertwist/place_classifier.hpp"

namespace supertwist {

struct MuEll {
  u64 ell = 0;
  FieldPtr field;
  u64 generator = 0;
  std::vector<u64> elements;  // generator^k, k = 0..ell-1
  std::unordered_map<u64, unsigned> dlog_table;

  unsigned dlog(u64 x) const {
    auto it = dlog_table.find(x);
    if (it == dlog_table.end()) throw std::logic_error("element is not an ell-th root of unity");
    return it->second;
  }
};

/// generator = g0^{(q-1)/ell} with g0 the smallest primitive root of F_q.
inline MuEll build_mu(const FieldPtr& field, u64 ell) {
  if (ell < 5 || !is_prime_u64(ell)) throw ConfigError("ell must be a prime >= 5");
  const u64 q = field->q();
  if ((q - 1) % ell != 0)
    throw ConfigError("ell = " + std::to_string(ell) + " does not divide q - 1 = " + std::to_string(q - 1));
  MuEll mu;
  mu.ell = ell;
  mu.field = field;
  mu.generator = field->pow(field->primitive_root(), (q - 1) / ell);
  u64 x = 1;
  for (unsigned k = 0; k < ell; ++k) {
    mu.elements.push_back(x);
    mu.dlog_table[x] = k;
    x = field->mul(x, mu.generator);
  }
  return mu;
}

/// Exponent of (a/pi)_ell = a^{(q^{deg pi} - 1)/ell} mod pi in terms of the generator.
inline unsigned symbol(const Poly& a, const Place& pi, const MuEll& mu) {
  const Poly r = a % pi.pi;
  if (r.is_zero()) throw std::domain_error("symbol: a is divisible by pi");
  const BigInt e = (big_pow(BigInt(mu.field->q()), static_cast<unsigned>(pi.degree())) - 1) / mu.ell;
  const Poly v = powmod(r, e, pi.pi);
  if (v.degree() > 0) throw std::logic_error("symbol: residue power is not a constant");
  return mu.dlog(v.coeff(0));
}

/// Sum over pi^m || g of m * symbol(a, pi), mod ell.
inline unsigned jacobi_symbol(const Poly& a, const Poly& g, const MuEll& mu, RandomStream& rng) {
  if (g.is_zero()) throw std::invalid_argument("jacobi_symbol: zero modulus");
  if (!gcd(a, g).is_one()) throw std::domain_error("jacobi_symbol: gcd(a, g) != 1");
  if (g.degree() == 0) return 0;
  auto fac = factor(g, rng);
  u64 s = 0;
  for (const auto& [pi, m] : fac.factors) s += static_cast<u64>(m) * symbol(a, Place{pi}, mu);
  return static_cast<unsigned>(s % mu.ell);
}

struct CensusCell {
  std::vector<unsigned> exponents;  // one per h_j
  u64 count = 0;
  double deviation = 0;  // count/total - ell^{-omega}
};

struct EquidistributionCensus {
  int degree = 0;
  u64 total = 0;
  std::vector<CensusCell> cells;
  double max_relative_deviation = 0;  // max |count - total/ell^omega| / (total/ell^omega)
};

/// Joint symbols ((v/h_1), ..., (v/h_omega)) over monic irreducible v of degree i,
/// optionally restricted to one place class; v equal to some h_j is skipped.
inline EquidistributionCensus equidistribution_census(const std::vector<Poly>& h, int i,
                                                      std::optional<PlaceClass> class_filter,
                                                      const CurveConfig* curve, const MuEll& mu,
                                                      u64 budget = kDefaultEnumerationBudget) {
  if (i < 1) throw std::invalid_argument("census degree must be >= 1");
  if (class_filter && !curve) throw std::invalid_argument("class filter needs a curve");
  std::vector<Place> places;
  for (const auto& g : h) {
    places.push_back(Place::checked(g));
    for (size_t j = 0; j + 1 < places.size(); ++j)
      if (places[j].pi == g) throw std::invalid_argument("census moduli must be distinct");
  }
  const size_t omega = h.size();
  u64 ncells = 1;
  for (size_t j = 0; j < omega; ++j) ncells *= mu.ell;
  EquidistributionCensus out;
  out.degree = i;
  std::vector<u64> counts(ncells, 0);
  for_each_monic(
      mu.field, i, MonicFilter::Irreducible,
      [&](const Poly& v) {
        for (const auto& g : h)
          if (g == v) return;
        if (class_filter && classify_place(*curve, Place{v}).place != *class_filter) return;
        u64 idx = 0, scale = 1;
        for (const auto& pl : places) {
          idx += symbol(v, pl, mu) * scale;
          scale *= mu.ell;
        }
        ++counts[idx];
        ++out.total;
      },
      budget);
  const double uniform = 1.0 / static_cast<double>(ncells);
  for (u64 idx = 0; idx < ncells; ++idx) {
    CensusCell c;
    u64 x = idx;
    for (size_t j = 0; j < omega; ++j) {
      c.exponents.push_back(static_cast<unsigned>(x % mu.ell));
      x /= mu.ell;
    }
    c.count = counts[idx];
    c.deviation = out.total ? static_cast<double>(c.count) / out.total - uniform : 0.0;
    if (out.total) {
      const double expect = out.total * uniform;
      out.max_relative_deviation = std::max(out.max_relative_deviation, std::fabs(c.count - expect) / expect);
    }
    out.cells.push_back(std::move(c));
  }
  return out;
}

}  // namespace supertwist
