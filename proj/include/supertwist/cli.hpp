#pragma once

// Subcommand dispatch, configuration resolution, report emission and run
// manifests. Exit codes: 0 success, 1 a checked claim failed, 2 bad
// configuration or any other error.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/version.hpp>

#include "supertwist/io.hpp"

namespace supertwist::cli {

using io::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kExitOk = 0;
inline constexpr int kExitClaimFailed = 1;
inline constexpr int kExitConfig = 2;

struct Outcome {
  json result;
  std::string csv;   // empty when the subcommand has no tabular form
  std::string text;  // empty when the subcommand has no text form
  bool pass = true;
  std::vector<std::string> warnings;
};

struct CurveOpts {
  u64 ell = 5;
  u64 q = 11;
  u64 p = 0;  // 0: the characteristic of q
  std::string curve_file;
  std::string a0 = "0,1", a1 = "0,1", a2 = "";
  long genus_L_bound = -1;  // -1: default bound
};

inline void add_curve_opts(CLI::App* sub, CurveOpts& c) {
  sub->add_option("--ell", c.ell, "prime ell >= 5 with ell | q - 1");
  sub->add_option("--q", c.q, "field size q = p^e");
  sub->add_option("--p", c.p, "characteristic of F_q (checked against q)");
  sub->add_option("--curve", c.curve_file, "JSON curve file; overrides --ell/--q/--a0/--a1/--a2");
  sub->add_option("--a0", c.a0, "coefficients of a0(t), lowest first");
  sub->add_option("--a1", c.a1, "coefficients of a1(t), lowest first");
  sub->add_option("--a2", c.a2, "coefficients of a2(t), lowest first");
  sub->add_option("--genus-bound", c.genus_L_bound, "upper bound for the genus of the splitting field");
}

inline const std::vector<std::string>& assumed_hypotheses() {
  static const std::vector<std::string> w{
      "assumed: the curve has totally split multiplicative reduction at the places of Sigma",
      "assumed: the constant field of the splitting field is F_q"};
  return w;
}

inline CurveConfig resolve_curve(const CurveOpts& c) {
  if (!c.curve_file.empty()) return io::curve_from_json(io::read_json_file(c.curve_file));
  auto [p, e] = io::split_prime_power(c.q);
  if (c.p && c.p != p)
    throw ConfigError("p = " + std::to_string(c.p) + " is not the characteristic of F_" + std::to_string(c.q));
  auto f = io::make_field(p, e);
  std::optional<long> g;
  if (c.genus_L_bound >= 0) g = c.genus_L_bound;
  return validate_config(c.ell, f, io::parse_poly(f, c.a0), io::parse_poly(f, c.a1), io::parse_poly(f, c.a2), g);
}

// ---------------------------------------------------------------------------
// Subcommands

inline Outcome run_table1() {
  auto cells = table1();
  Outcome o;
  o.result = io::to_json(cells);
  o.csv = io::table1_csv(cells);
  o.text = io::table1_text(cells);
  for (const auto& c : cells) o.pass = o.pass && c.within_tolerance;
  return o;
}

struct ConstantsOpts {
  u64 ell = 5, p = 7;
  unsigned m = 1;
  std::string mode = "tabulated";
  double rho = -1;
  std::vector<u64> probe;
};

inline ExponentMode parse_mode(const std::string& s) {
  if (s == "tabulated") return ExponentMode::Tabulated;
  if (s == "displayed") return ExponentMode::Displayed;
  throw ConfigError("--mode must be tabulated or displayed");
}

inline Outcome run_constants(const ConstantsOpts& c) {
  const ExponentMode mode = parse_mode(c.mode);
  check_constants_query(c.ell, c.p);
  if (c.m < 1) throw ConfigError("--m must be >= 1");
  auto E = E_const<HighPrec>(c.ell, c.p, c.m, mode);
  auto mb = moment_bound(c.ell, c.p, c.m, mode);
  Outcome o;
  json j;
  j["ell"] = c.ell;
  j["p"] = c.p;
  j["m"] = c.m;
  j["mode"] = to_string(mode);
  j["S"] = S_const(c.ell, c.p).str();
  j["E"] = static_cast<double>(E.value);
  j["E_even_sum"] = static_cast<double>(E.even_sum);
  j["E_odd_sum"] = static_cast<double>(E.odd_sum);
  j["E_terms"] = E.terms;
  j["E_remainder_bound"] = static_cast<double>(E.remainder_bound);
  j["normalizer"] = static_cast<double>(E.normalizer);
  j["P"] = static_cast<double>(P_const<HighPrec>(c.ell, c.m));
  j["log_moment_bound"] = static_cast<double>(mb.log_value);
  j["moment_bound_fits_double"] = mb.fits_double;
  if (mb.fits_double) j["moment_bound"] = static_cast<double>(mb.direct_value);
  if (c.rho >= 0) {
    j["rho"] = c.rho;
    j["E_C"] = static_cast<double>(E_C<HighPrec>(c.ell, c.p, c.m, c.rho, mode));
    j["P_C"] = static_cast<double>(P_C<HighPrec>(c.ell, c.m, c.rho));
  }
  io::CsvWriter w({"quantity", "value"});
  for (auto it = j.begin(); it != j.end(); ++it)
    w.row({it.key(), it->is_string() ? it->get<std::string>() : it->dump()});
  if (!c.probe.empty()) {
    json rows = json::array();
    for (const auto& r : asymptotics_probe(c.p, c.probe))
      rows.push_back({{"ell", r.ell}, {"E", r.E}, {"e_scaled", r.e_scaled}, {"p1_scaled", r.p1_scaled},
                      {"p2_scaled", r.p2_scaled}});
    j["asymptotics"] = rows;
  }
  o.result = j;
  o.csv = w.str();
  return o;
}

struct StationaryOpts {
  u64 ell = 5;
  int R = 60;
  double rho0 = 0;
};

inline Outcome run_stationary(const StationaryOpts& c) {
  if (c.ell < 5 || !is_prime_u64(c.ell)) throw ConfigError("--ell must be a prime >= 5");
  if (c.R < 20) throw ConfigError("--R must be >= 20");
  if (!(c.rho0 >= 0 && c.rho0 <= 1)) throw ConfigError("--rho0 must lie in [0,1]");
  MarkovOp T = MarkovOp::m_T(c.ell, c.R);
  auto pr = pr_distribution(c.ell, c.R);
  auto pw = parity_weighted_pr(c.ell, c.rho0, c.R);
  auto g = estimate_gamma(T);
  const double resid = fixed_point_residual(T, pw);
  Outcome o;
  o.result = json{{"ell", c.ell},
                  {"R", c.R},
                  {"rho0", c.rho0},
                  {"pr", io::to_json(pr)},
                  {"parity_weighted_pr", io::to_json(pw)},
                  {"fixed_point_residual", resid},
                  {"gamma", g.gamma},
                  {"gamma_power", g.power},
                  {"gamma_fitted", g.fitted},
                  {"gamma_per_class", g.per_class},
                  {"alpha", alpha_exponent(g.gamma, 5.0 / 6.0)}};
  io::CsvWriter w({"rank", "pr", "parity_weighted_pr"});
  for (int r = 0; r <= c.R; ++r)
    w.row({std::to_string(r), io::num(pr.probs[static_cast<size_t>(r)]), io::num(pw.probs[static_cast<size_t>(r)])});
  o.csv = w.str();
  return o;
}

struct SimulateOpts {
  CurveOpts curve;
  int n = 30;
  u64 samples = 1000;
  u64 seed = 0;
  std::string mode = "two_step";
  std::string mu_star = "0";
  int R = 60;
  bool strict_fhat = false, shuffle = false;
  double time_limit = 0;
};

/// "r" is a point mass at rank r; "p0,p1,..." lists probabilities.
inline RankDist parse_mu_star(const std::string& s, int R) {
  if (s.find(',') == std::string::npos) {
    try {
      return RankDist::point(std::stoi(s), R);
    } catch (const std::exception&) {
      throw ConfigError("--mu-star: '" + s + "' is not a rank in [0, R]");
    }
  }
  RankDist d;
  d.probs.assign(static_cast<size_t>(R) + 1, 0.0);
  std::stringstream ss(s);
  std::string tok;
  size_t i = 0;
  while (std::getline(ss, tok, ',')) {
    if (i > static_cast<size_t>(R)) throw ConfigError("--mu-star has more entries than R + 1");
    try {
      d.probs[i++] = std::stod(tok);
    } catch (const std::exception&) {
      throw ConfigError("--mu-star: bad probability '" + tok + "'");
    }
  }
  return d;
}

inline Outcome run_simulate(const SimulateOpts& c, unsigned workers) {
  SimConfig sc(resolve_curve(c.curve));
  sc.n = c.n;
  sc.samples = c.samples;
  sc.seed = c.seed;
  sc.workers = workers;
  sc.mu_star = parse_mu_star(c.mu_star, c.R);
  if (c.mode == "two_step")
    sc.mode = TransitionMode::TwoStep;
  else if (c.mode == "d_table")
    sc.mode = TransitionMode::DTable;
  else
    throw ConfigError("--mode must be two_step or d_table");
  sc.strict_fhat = c.strict_fhat;
  sc.shuffle = c.shuffle;
  sc.time_limit_seconds = c.time_limit;
  auto rep = run_experiment(sc);
  auto pred = predicted_law(sc, rep.p2_histogram);
  Outcome o;
  o.result = io::to_json(rep);
  o.result["curve"] = io::curve_json(sc.curve);
  o.result["predicted"] = io::to_json(pred);
  o.result["tv_predicted"] = total_variation(pred, rep.empirical);
  io::CsvWriter w({"rank", "count", "empirical", "theoretical", "abs_diff", "predicted"});
  for (int r = 0; r <= c.R; ++r) {
    const size_t i = static_cast<size_t>(r);
    w.row({std::to_string(r), std::to_string(i < rep.counts.size() ? rep.counts[i] : 0), io::num(rep.empirical.probs[i]),
           io::num(rep.target.probs[i]), io::num(std::fabs(rep.empirical.probs[i] - rep.target.probs[i])),
           io::num(pred.probs[i])});
  }
  o.csv = w.str();
  o.warnings = assumed_hypotheses();
  return o;
}

struct ClassifyOpts {
  CurveOpts curve;
  std::vector<std::string> places;
  int degree = 0;
};

inline Outcome run_classify(const ClassifyOpts& c, unsigned workers) {
  auto curve = resolve_curve(c.curve);
  if (c.places.empty() && c.degree < 1) throw ConfigError("give --place or --degree");
  Outcome o;
  json j{{"curve", io::curve_json(curve)}};
  io::CsvWriter w({"place", "frob", "class"});
  if (!c.places.empty()) {
    json rows = json::array();
    for (const auto& s : c.places) {
      Place v = Place::checked(io::parse_poly(curve.field, s));
      auto cl = classify_place(curve, v);
      rows.push_back({{"place", io::poly_json(v.pi)}, {"frob", to_string(cl.frob)}, {"class", to_string(cl.place)}});
      w.row({v.pi.to_string(), to_string(cl.frob), to_string(cl.place)});
    }
    j["places"] = rows;
  }
  if (c.degree >= 1) {
    auto cen = density_census(curve, c.degree, workers);
    j["census"] = io::to_json(cen);
    if (c.places.empty()) {
      io::CsvWriter cw({"degree", "Identity", "Transposition", "ThreeCycle", "Ramified"});
      for (const auto& d : cen.per_degree)
        cw.row({std::to_string(d.degree), std::to_string(d.counts[0]), std::to_string(d.counts[1]),
                std::to_string(d.counts[2]), std::to_string(d.counts[3])});
      o.csv = cw.str();
    }
  }
  if (o.csv.empty()) o.csv = w.str();
  o.result = j;
  o.warnings = assumed_hypotheses();
  return o;
}

struct ChebotarevOpts {
  CurveOpts curve;
  int degree = 4;
};

inline Outcome run_chebotarev(const ChebotarevOpts& c, unsigned workers) {
  auto curve = resolve_curve(c.curve);
  if (c.degree < 1) throw ConfigError("--degree must be >= 1");
  auto cen = density_census(curve, c.degree, workers);
  auto rows = chebotarev_audit(curve, cen);
  Outcome o;
  o.result = json{{"curve", io::curve_json(curve)}, {"census", io::to_json(cen)}, {"audit", io::to_json(rows)}};
  o.csv = io::audit_csv(rows);
  for (const auto& r : rows) o.pass = o.pass && r.pass;
  o.result["all_pass"] = o.pass;
  o.warnings = assumed_hypotheses();
  return o;
}

struct OmegaOpts {
  u64 q = 11;
  int n = 10;
};

inline Outcome run_omega(const OmegaOpts& c) {
  io::split_prime_power(c.q);
  if (c.n < 1 || c.n > 64) throw ConfigError("--n must lie in [1, 64]");
  auto dist = omega_distribution(c.q, c.n);
  BigInt total = 0;
  json counts = json::array();
  io::CsvWriter w({"omega", "count"});
  for (size_t k = 0; k < dist.size(); ++k) {
    total += dist[k];
    counts.push_back(dist[k].str());
    w.row({std::to_string(k), dist[k].str()});
  }
  Outcome o;
  o.pass = total == big_pow(BigInt(c.q), static_cast<unsigned>(c.n));
  o.result = json{{"q", c.q}, {"n", c.n}, {"counts", counts}, {"total", total.str()}, {"total_is_q_pow_n", o.pass}};
  o.csv = w.str();
  return o;
}

struct ClaimsOpts {
  u64 ell = 5, p = 7;
  int k_max = 6;
  int rank_offset = 0;
  bool all = false;
};

inline Outcome run_claims(const ClaimsOpts& c) {
  if (c.k_max < 1) throw ConfigError("--kmax must be >= 1");
  std::vector<ClaimReport> reps;
  if (c.all) {
    for (u64 ell : kTablePrimes)
      for (u64 p : kTablePrimes)
        if (ell != p) reps.push_back(verify_claims(ell, p, c.k_max, c.rank_offset));
  } else {
    check_constants_query(c.ell, c.p);
    reps.push_back(verify_claims(c.ell, c.p, c.k_max, c.rank_offset));
  }
  Outcome o;
  json arr = json::array();
  for (const auto& r : reps) {
    arr.push_back(io::to_json(r));
    o.pass = o.pass && r.all_pass();
  }
  o.result = reps.size() == 1 ? arr[0] : json{{"reports", arr}, {"all_pass", o.pass}};
  o.csv = io::claims_csv(reps);
  return o;
}

inline Outcome run_s3_check(u64 ell) {
  if (ell < 5 || !is_prime_u64(ell)) throw ConfigError("--ell must be a prime >= 5");
  auto rep = s3_representation_checks(ell);
  Outcome o;
  o.result = io::to_json(rep);
  o.pass = rep.all_pass() && rep.fixed_dims == std::vector<int>{2, 1, 1, 1, 0, 0};
  io::CsvWriter w({"check", "pass"});
  for (const char* k : {"printed_matches_action", "closed", "homomorphism", "isomorphic_to_s3", "no_invariant_line",
                        "centralizer_scalar"})
    w.row({k, o.result[k].get<bool>() ? "true" : "false"});
  o.csv = w.str();
  return o;
}

struct DTableOpts {
  u64 ell = 5;
  int r_max = 64;
};

inline Outcome run_dtable_diff(const DTableOpts& c) {
  if (c.ell < 5 || !is_prime_u64(c.ell)) throw ConfigError("--ell must be a prime >= 5");
  if (c.r_max < 2) throw ConfigError("--rmax must be >= 2");
  auto rows = compare_dtable_vs_two_step(c.ell, c.r_max);
  bool sums_ok = true;
  for (int r = 0; r <= c.r_max; ++r)
    for (PlaceClass k : {PlaceClass::P0, PlaceClass::P1, PlaceClass::P2}) {
      Rational s = 0;
      for (const auto& [j, v] : dtable(c.ell, r, k)) s += v;
      sums_ok = sums_ok && s == 1;
    }
  Outcome o;
  o.result = json{{"ell", c.ell}, {"r_max", c.r_max}, {"rows_sum_to_one", sums_ok}, {"rows", io::to_json(rows)}};
  o.csv = io::dtable_csv(rows);
  o.pass = sums_ok;
  return o;
}

struct ResidueOpts {
  CurveOpts curve;
  std::vector<std::string> h;
  int degree = 1;
  std::string cls;
};

inline Outcome run_residue_census(const ResidueOpts& c) {
  if (c.h.empty()) throw ConfigError("give at least one --modulus");
  auto [p, e] = io::split_prime_power(c.curve.q);
  std::optional<CurveConfig> curve;
  FieldPtr f;
  if (!c.cls.empty() || !c.curve.curve_file.empty()) {
    curve = resolve_curve(c.curve);
    f = curve->field;
  } else {
    throw_if_errors(ell_context_errors(c.curve.ell, FieldSpec{p, e, {}}));
    f = io::make_field(p, e);
  }
  auto mu = build_mu(f, curve ? curve->ell : c.curve.ell);
  std::vector<Poly> hs;
  for (const auto& s : c.h) hs.push_back(io::parse_poly(f, s));
  std::optional<PlaceClass> filter;
  if (c.cls == "P0")
    filter = PlaceClass::P0;
  else if (c.cls == "P2")
    filter = PlaceClass::P2;
  else if (!c.cls.empty())
    throw ConfigError("--class must be P0 or P2");
  auto cen = equidistribution_census(hs, c.degree, filter, curve ? &*curve : nullptr, mu);
  Outcome o;
  o.result = io::to_json(cen);
  o.result["ell"] = mu.ell;
  o.result["generator"] = mu.generator;
  std::vector<std::string> header;
  for (size_t j = 0; j < hs.size(); ++j) header.push_back("e" + std::to_string(j + 1));
  header.push_back("count");
  io::CsvWriter w(header);
  for (const auto& cell : cen.cells) {
    std::vector<std::string> r;
    for (unsigned x : cell.exponents) r.push_back(std::to_string(x));
    r.push_back(std::to_string(cell.count));
    w.row(r);
  }
  o.csv = w.str();
  return o;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline bool ends_with(const std::string& s, const std::string& t) {
  return s.size() >= t.size() && s.compare(s.size() - t.size(), t.size(), t) == 0;
}

/// Resolved option values of a parsed subcommand, keyed by long name.
inline json resolved_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "out" || name == "manifest") continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      cfg[name] = opt->get_expected_max() > 1 ? json(res) : json(res.back());
    } else if (opt->get_expected_max() == 1 && !opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

inline std::vector<std::string> argv_from_manifest(const json& m) {
  if (!m.contains("subcommand") || !m.contains("config")) throw ConfigError("manifest lacks subcommand or config");
  std::vector<std::string> a{"supertwist", m.at("subcommand").get<std::string>()};
  for (auto it = m.at("config").begin(); it != m.at("config").end(); ++it) {
    const json& v = *it;
    if (v.is_boolean()) {
      if (v.get<bool>()) a.push_back("--" + it.key());
    } else if (v.is_array()) {
      for (const auto& x : v) {
        a.push_back("--" + it.key());
        a.push_back(x.get<std::string>());
      }
    } else {
      a.push_back("--" + it.key());
      a.push_back(v.get<std::string>());
    }
  }
  return a;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << data;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"supertwist: twisted superelliptic curves over F_q(t)"};
  app.require_subcommand(0, 1);
  std::string replay, out_path, manifest_path, format;
  unsigned workers = 1;
  app.add_option("--replay", replay, "rerun the subcommand recorded in a manifest");
  app.add_option("--out", out_path, "output path for --replay");
  app.set_version_flag("--version", kVersion);

  std::map<std::string, std::function<Outcome()>> handlers;
  std::map<std::string, CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help, bool parallel = false) {
    CLI::App* s = app.add_subcommand(name, help);
    s->option_defaults()->always_capture_default();
    s->add_option("--out", out_path, "output file (stdout when absent)");
    s->add_option("--manifest", manifest_path, "manifest path (default <out>.manifest.json)");
    s->add_option("--format", format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    if (parallel) s->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 256u));
    subs[name] = s;
    return s;
  };

  add("table1", "reproduce the table of E and P values");
  handlers["table1"] = [] { return run_table1(); };

  ConstantsOpts co;
  {
    auto* s = add("constants", "S, E, P and the moment bound for one (ell, p, m)");
    s->add_option("--ell", co.ell);
    s->add_option("--p", co.p);
    s->add_option("--m", co.m);
    s->add_option("--mode", co.mode, "tabulated or displayed");
    s->add_option("--rho", co.rho, "parity weight for the refined E_C, P_C (negative: off)");
    s->add_option("--probe", co.probe, "ell values for the asymptotics probe")->delimiter(',');
  }
  handlers["constants"] = [&] { return run_constants(co); };

  StationaryOpts so;
  {
    auto* s = add("stationary", "stationary laws and convergence rate of the twist operator");
    s->add_option("--ell", so.ell);
    s->add_option("--R", so.R, "rank truncation");
    s->add_option("--rho0", so.rho0, "initial parity");
  }
  handlers["stationary"] = [&] { return run_stationary(so); };

  SimulateOpts sim;
  {
    auto* s = add("simulate", "Monte Carlo rank walk over random twists", true);
    add_curve_opts(s, sim.curve);
    s->add_option("--n,--degree", sim.n, "twist degree");
    s->add_option("--samples", sim.samples);
    s->add_option("--seed", sim.seed)->required();
    s->add_option("--mode", sim.mode, "two_step or d_table");
    s->add_option("--mu-star", sim.mu_star, "initial rank, or comma separated probabilities");
    s->add_option("--R", sim.R, "rank truncation");
    s->add_flag("--strict-fhat", sim.strict_fhat, "keep only twists with a large P0 factor");
    s->add_flag("--shuffle", sim.shuffle, "visit factors in random order");
    s->add_option("--time-limit", sim.time_limit, "seconds; 0 disables");
  }
  handlers["simulate"] = [&] { return run_simulate(sim, workers); };

  ClassifyOpts cl;
  {
    auto* s = add("classify", "Frobenius class of places", true);
    add_curve_opts(s, cl.curve);
    s->add_option("--place", cl.places, "monic irreducible, coefficients lowest first");
    s->add_option("--degree", cl.degree, "classify every place up to this degree");
  }
  handlers["classify"] = [&] { return run_classify(cl, workers); };

  ChebotarevOpts ch;
  {
    auto* s = add("chebotarev", "exhaustive census against the effective Chebotarev bound", true);
    add_curve_opts(s, ch.curve);
    s->add_option("--degree", ch.degree);
  }
  handlers["chebotarev"] = [&] { return run_chebotarev(ch, workers); };

  OmegaOpts om;
  {
    auto* s = add("omega-dist", "monic polynomials of degree n by number of distinct irreducible factors");
    s->add_option("--q", om.q);
    s->add_option("--n,--degree", om.n);
  }
  handlers["omega-dist"] = [&] { return run_omega(om); };

  ClaimsOpts cc;
  {
    auto* s = add("claims", "point-count and tail claims in exact arithmetic");
    s->add_option("--ell", cc.ell);
    s->add_option("--p", cc.p);
    s->add_option("--kmax", cc.k_max);
    s->add_option("--rank-offset", cc.rank_offset, "rank cutoff is k + offset");
    s->add_flag("--all", cc.all, "every (ell, p) pair of the table");
  }
  handlers["claims"] = [&] { return run_claims(cc); };

  u64 s3_ell = 5;
  {
    auto* s = add("s3-check", "the 2x2 representation of S_3 over F_ell");
    s->add_option("--ell", s3_ell);
  }
  handlers["s3-check"] = [&] { return run_s3_check(s3_ell); };

  DTableOpts dt;
  {
    auto* s = add("dtable-diff", "printed P2 transition row against the two-step law");
    s->add_option("--ell", dt.ell);
    s->add_option("--rmax", dt.r_max);
  }
  handlers["dtable-diff"] = [&] { return run_dtable_diff(dt); };

  ResidueOpts rc;
  {
    auto* s = add("residue-census", "joint ell-th power residue symbols over places of one degree");
    add_curve_opts(s, rc.curve);
    s->add_option("--modulus", rc.h, "modulus h_j, coefficients lowest first (repeatable)");
    s->add_option("--degree", rc.degree);
    s->add_option("--class", rc.cls, "restrict to P0 or P2 places (uses the curve)");
  }
  handlers["residue-census"] = [&] { return run_residue_census(rc); };

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (!replay.empty()) {
    try {
      json m = io::read_json_file(replay);
      auto a = detail::argv_from_manifest(m);
      std::string target = !out_path.empty() ? out_path : m.value("output", std::string());
      if (!target.empty()) {
        a.push_back("--out");
        a.push_back(target);
      }
      return dispatch(a, out, err);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }

  const auto parsed = app.get_subcommands();
  if (parsed.empty()) {
    err << "error: a subcommand is required\n" << app.help();
    return kExitConfig;
  }
  const std::string name = parsed.front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = handlers.at(name)();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (format.empty()) {
    if (detail::ends_with(out_path, ".csv"))
      format = "csv";
    else if (name == "table1" && out_path.empty())
      format = "text";
    else
      format = "json";
  }
  std::string body;
  if (format == "json") {
    body = o.result.dump(2) + "\n";
  } else if (format == "csv") {
    body = o.csv;
  } else {
    if (o.text.empty()) {
      err << "error: " << name << " has no text form; use --format json or csv\n";
      return kExitConfig;
    }
    body = o.text;
  }
  if (body.empty()) {
    err << "error: " << name << " has no " << format << " form\n";
    return kExitConfig;
  }
  for (const auto& w : o.warnings) err << "warning: " << w << "\n";

  const int code = o.pass ? kExitOk : kExitClaimFailed;
  json manifest{{"subcommand", name},
                {"config", detail::resolved_config(parsed.front())},
                {"versions",
                 {{"supertwist", kVersion},
                  {"boost", BOOST_LIB_VERSION},
                  {"compiler", __VERSION__},
                  {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                {"timing", {{"seconds", seconds}}},
                {"exit_code", code}};
  manifest["config"]["format"] = format;
  if (manifest["config"].contains("seed")) manifest["seed"] = manifest["config"]["seed"];
  try {
    if (!out_path.empty()) {
      detail::write_file(out_path, body);
      manifest["output"] = out_path;
      const std::string mpath = manifest_path.empty() ? out_path + ".manifest.json" : manifest_path;
      manifest["manifest"] = mpath;
      detail::write_file(mpath, manifest.dump(2) + "\n");
    } else {
      out << body;
      if (!manifest_path.empty()) {
        manifest["manifest"] = manifest_path;
        detail::write_file(manifest_path, manifest.dump(2) + "\n");
      } else {
        err << "manifest: " << manifest.dump() << "\n";
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return code;
}

}  // namespace supertwist::cli
