#pragma once

// JSON and RFC-4180 CSV emission for module reports, field and polynomial
// parsing, and the JSON curve file format.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "supertwist/constants.hpp"
#include "supertwist/markov.hpp"
#include "supertwist/place_classifier.hpp"
#include "supertwist/residue_symbols.hpp"
#include "supertwist/twist_sim.hpp"

namespace supertwist::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw std::logic_error("csv row width does not match header");
    rows_.push_back(cells);
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trip decimal form.
inline std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline std::string rational_str(const Rational& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------
// Fields, polynomials, curves

/// F_{p^e}; for e > 1 the modulus is the first monic irreducible of degree e
/// in enumeration order, so the choice is reproducible.
inline FieldPtr make_field(u64 p, unsigned e = 1) {
  if (!is_prime_u64(p)) throw ConfigError("p = " + std::to_string(p) + " is not prime");
  if (e == 0) throw ConfigError("field degree e must be >= 1");
  if (e == 1) return Field::prime(p);
  auto fp = Field::prime(p);
  std::optional<Poly> mod;
  for_each_monic(fp, static_cast<int>(e), MonicFilter::Irreducible, [&](const Poly& g) {
    if (!mod) mod = g;
  });
  return Field::make(FieldSpec{p, e, mod->coeffs()});
}

/// Splits q = p^e; rejects q that is not a prime power.
inline std::pair<u64, unsigned> split_prime_power(u64 q) {
  if (q < 2) throw ConfigError("q must be a prime power >= 2");
  auto ps = distinct_prime_factors(q);
  if (ps.size() != 1) throw ConfigError("q = " + std::to_string(q) + " is not a prime power");
  unsigned e = 0;
  for (u64 x = q; x > 1; x /= ps[0]) ++e;
  return {ps[0], e};
}

/// Comma separated coefficients, lowest degree first ("0,1" is t).
inline Poly parse_poly(const FieldPtr& f, const std::string& text) {
  std::vector<u64> c;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) continue;
    long long v = 0;
    try {
      size_t used = 0;
      v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad polynomial coefficient '" + tok + "'");
    }
    if (f->e() == 1) {
      c.push_back(f->from_int(v));
    } else {
      if (v < 0 || static_cast<u64>(v) >= f->q()) throw ConfigError("coefficient " + tok + " is not an element of F_q");
      c.push_back(static_cast<u64>(v));
    }
  }
  return Poly(f, std::move(c));
}

inline json poly_json(const Poly& a) { return json(a.coeffs()); }

inline Poly poly_from_json(const FieldPtr& f, const json& j) {
  if (!j.is_array()) throw ConfigError("polynomial must be a coefficient array");
  std::vector<u64> c;
  for (const auto& x : j) {
    const long long v = x.get<long long>();
    if (f->e() == 1)
      c.push_back(f->from_int(v));
    else if (v < 0 || static_cast<u64>(v) >= f->q())
      throw ConfigError("coefficient " + std::to_string(v) + " is not an element of F_q");
    else
      c.push_back(static_cast<u64>(v));
  }
  return Poly(f, std::move(c));
}

/// {"ell":5,"p":11,"e":1,"a0":[0,1],"a1":[0,1],"a2":[],"genus_L_bound":7}
/// describes x^3 + a2 x^2 + a1 x + a0; "e" and "genus_L_bound" are optional.
inline CurveConfig curve_from_json(const json& j) {
  for (const char* k : {"ell", "p", "a0", "a1"})
    if (!j.contains(k)) throw ConfigError(std::string("curve file: missing key '") + k + "'");
  const u64 ell = j.at("ell").get<u64>();
  auto f = make_field(j.at("p").get<u64>(), j.value("e", 1u));
  std::optional<long> g;
  if (j.contains("genus_L_bound")) g = j.at("genus_L_bound").get<long>();
  const Poly a2 = j.contains("a2") ? poly_from_json(f, j.at("a2")) : Poly(f);
  return validate_config(ell, f, poly_from_json(f, j.at("a0")), poly_from_json(f, j.at("a1")), a2, g);
}

inline json curve_json(const CurveConfig& c) {
  json j;
  j["ell"] = c.ell;
  j["p"] = c.field->p();
  j["e"] = c.field->e();
  j["a0"] = poly_json(c.F.a[0]);
  j["a1"] = poly_json(c.F.a[1]);
  j["a2"] = poly_json(c.F.a[2]);
  j["genus_L_bound"] = c.genus_L_bound;
  j["disc"] = poly_json(c.disc);
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const RankDist& d) {
  return json{{"probs", d.probs}, {"tail", d.tail}};
}

inline json to_json(const std::vector<Table1Cell>& cells) {
  json rows = json::array(), omitted = json::array();
  for (const auto& c : cells) {
    if (c.omitted) {
      omitted.push_back({{"quantity", c.quantity}, {"ell", c.ell}, {"p", c.p}});
      continue;
    }
    json r{{"quantity", c.quantity}, {"ell", c.ell}};
    if (c.p) r["p"] = c.p;
    r["value"] = c.value;
    r["reference"] = c.reference;
    r["within_tolerance"] = c.within_tolerance;
    rows.push_back(r);
  }
  return json{{"tolerance", kTableTolerance}, {"cells", rows}, {"omitted", omitted}};
}

inline std::string table1_csv(const std::vector<Table1Cell>& cells) {
  CsvWriter w({"quantity", "ell", "p", "value", "reference", "abs_diff", "within_tolerance"});
  for (const auto& c : cells) {
    if (c.omitted) continue;
    w.row({c.quantity, std::to_string(c.ell), c.p ? std::to_string(c.p) : "", num(c.value), num(c.reference),
           num(std::fabs(c.value - c.reference)), c.within_tolerance ? "true" : "false"});
  }
  return w.str();
}

/// Rows p = 5..17 then P(ell,1), P(ell,2); columns ell = 5..17; x marks ell = p.
inline std::string table1_text(const std::vector<Table1Cell>& cells) {
  std::ostringstream os;
  os << std::fixed;
  os << std::setw(10) << "";
  for (u64 ell : kTablePrimes) os << std::setw(11) << ("l=" + std::to_string(ell));
  os << "\n";
  auto find = [&](const std::string& qn, u64 ell, u64 p) -> const Table1Cell& {
    for (const auto& c : cells)
      if (c.quantity == qn && c.ell == ell && c.p == p) return c;
    throw std::logic_error("missing table cell");
  };
  for (u64 p : kTablePrimes) {
    os << std::setw(10) << ("E p=" + std::to_string(p));
    for (u64 ell : kTablePrimes) {
      const auto& c = find("E", ell, p);
      if (c.omitted)
        os << std::setw(11) << "x";
      else
        os << std::setw(10) << std::setprecision(5) << c.value << (c.within_tolerance ? " " : "!");
    }
    os << "\n";
  }
  for (const char* qn : {"P1", "P2"}) {
    os << std::setw(10) << (std::string(qn) == "P1" ? "P(l,1)" : "P(l,2)");
    for (u64 ell : kTablePrimes) {
      const auto& c = find(qn, ell, 0);
      os << std::setw(10) << std::setprecision(5) << c.value << (c.within_tolerance ? " " : "!");
    }
    os << "\n";
  }
  return os.str();
}

inline json to_json(const ClaimReport& r) {
  json rows = json::array();
  for (const auto& c : r.rows)
    rows.push_back({{"id", c.id}, {"inputs", c.inputs}, {"left", c.left}, {"right", c.right}, {"pass", c.pass}});
  return json{{"ell", r.ell}, {"p", r.p}, {"k_max", r.k_max}, {"rank_offset", r.rank_offset},
              {"all_pass", r.all_pass()}, {"rows", rows}};
}

inline std::string claims_csv(const std::vector<ClaimReport>& reps) {
  CsvWriter w({"ell", "p", "id", "inputs", "left", "right", "pass"});
  for (const auto& r : reps)
    for (const auto& c : r.rows)
      w.row({std::to_string(r.ell), std::to_string(r.p), c.id, c.inputs, c.left, c.right, c.pass ? "true" : "false"});
  return w.str();
}

inline json to_json(const DensityCensus& c) {
  json rows = json::array();
  for (size_t i = 0; i < c.per_degree.size(); ++i) {
    const auto& d = c.per_degree[i];
    json r{{"degree", d.degree}};
    for (FrobClass k : kFrobClasses) r[to_string(k)] = d.counts[static_cast<size_t>(k)];
    json cum;
    for (FrobClass k : {FrobClass::Identity, FrobClass::Transposition, FrobClass::ThreeCycle})
      cum[to_string(k)] = c.cumulative_density(i, k);
    r["cumulative_density"] = cum;
    rows.push_back(r);
  }
  return rows;
}

inline json to_json(const std::vector<AuditRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json j{{"degree", r.degree},
           {"class", to_string(r.cls)},
           {"observed", r.observed},
           {"expected", static_cast<double>(r.expected)},
           {"bound", static_cast<double>(r.bound)},
           {"pass", r.pass},
           {"density", r.density},
           {"ratio_condition_met", r.ratio.condition_met}};
    if (r.ratio.condition_met) j["ratio_bound"] = static_cast<double>(r.ratio.bound);
    j["density_pass"] = r.density_pass;
    out.push_back(j);
  }
  return out;
}

inline std::string audit_csv(const std::vector<AuditRow>& rows) {
  CsvWriter w({"degree", "class", "observed", "expected", "bound", "pass", "density", "density_pass"});
  for (const auto& r : rows)
    w.row({std::to_string(r.degree), to_string(r.cls), std::to_string(r.observed),
           num(static_cast<double>(r.expected)), num(static_cast<double>(r.bound)), r.pass ? "true" : "false",
           num(r.density), r.density_pass ? "true" : "false"});
  return w.str();
}

inline json to_json(const S3RepReport& r) {
  json els = json::array();
  for (size_t i = 0; i < r.elements.size(); ++i)
    els.push_back({{"name", r.elements[i].name},
                   {"perm", r.elements[i].perm},
                   {"printed", r.elements[i].printed},
                   {"fixed_dim", r.fixed_dims.at(i)}});
  return json{{"ell", r.ell},
              {"elements", els},
              {"printed_matches_action", r.printed_matches_action},
              {"closed", r.closed},
              {"homomorphism", r.homomorphism},
              {"isomorphic_to_s3", r.isomorphic_to_s3},
              {"no_invariant_line", r.no_invariant_line},
              {"centralizer_scalar", r.centralizer_scalar},
              {"fixed_dims", r.fixed_dims},
              {"all_pass", r.all_pass()}};
}

inline json to_json(const std::vector<DTableDiffRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"r", r.r},
                   {"j", r.j},
                   {"printed", rational_str(r.printed)},
                   {"two_step", rational_str(r.two_step)},
                   {"diff", rational_str(r.printed - r.two_step)}});
  return out;
}

inline std::string dtable_csv(const std::vector<DTableDiffRow>& rows) {
  CsvWriter w({"r", "j", "printed", "two_step", "diff"});
  for (const auto& r : rows)
    w.row({std::to_string(r.r), std::to_string(r.j), rational_str(r.printed), rational_str(r.two_step),
           rational_str(r.printed - r.two_step)});
  return w.str();
}

inline json to_json(const SimReport& r) {
  json fh = json::array();
  for (const auto& [k, v] : r.fhat)
    fh.push_back({{"w", std::get<0>(k)}, {"w_prime", std::get<1>(k)}, {"has_large_P0", std::get<2>(k)}, {"count", v}});
  json cc;
  for (FrobClass k : kFrobClasses) cc[to_string(k)] = r.class_counts[static_cast<size_t>(k)];
  return json{{"seed", r.seed},
              {"n", r.n},
              {"samples", r.samples},
              {"kept", r.kept},
              {"mode", to_string(r.mode)},
              {"counts", r.counts},
              {"empirical", to_json(r.empirical)},
              {"parity", r.parity},
              {"rho0", r.rho0},
              {"target", to_json(r.target)},
              {"tv", r.tv},
              {"class_counts", cc},
              {"p2_histogram", r.p2_histogram},
              {"omega_histogram", r.omega_histogram},
              {"with_large_P0", r.with_large_P0},
              {"with_ramified", r.with_ramified},
              {"fhat", fh}};
}

inline json to_json(const EquidistributionCensus& c) {
  json cells = json::array();
  for (const auto& x : c.cells)
    cells.push_back({{"exponents", x.exponents}, {"count", x.count}, {"deviation", x.deviation}});
  return json{{"degree", c.degree}, {"total", c.total}, {"max_relative_deviation", c.max_relative_deviation},
              {"cells", cells}};
}

}  // namespace supertwist::io
