// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "runner/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "bessel/bessel_numerics.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "diffusion/diffusion_sim.hpp"
#include "enumeration/exact_enum.hpp"
#include "regen/regen_sampler.hpp"
#include "runner/cache.hpp"

namespace blt::runner {

namespace fs = std::filesystem;
using nlohmann::json;
using lattice::DyadicProb;
using lattice::LatticePath;
using lattice::ProbInterval;

namespace {

struct Context {
  explicit Context(const RunConfig& config) : cfg(config) {}

  const RunConfig& cfg;
  int threads = 1;
  std::optional<TableCache> cache;
  bool all_cached = true;
  bool used_cache = false;
  json diagnostics = json::object();
  std::vector<CsvArtifact> csv;

  TableCache& table_cache() {
    if (!cache) {
      if (cfg.boolean("no_cache")) {
        cache.emplace();
      } else {
        cache.emplace(resolve_cache_dir(cfg.string("cache_dir")));
      }
    }
    return *cache;
  }
};

json exact(const DyadicProb& p) {
  return {{"exact", p.to_string()}, {"numerator", p.numerator_string()}, {"exponent", p.exponent()},
          {"value", p.to_double()}};
}

json interval(const ProbInterval& iv) { return {{"lower", exact(iv.lower)}, {"upper", exact(iv.upper)}}; }

std::uint64_t stream_seed(const RunConfig& cfg, std::uint64_t stream) { return derive_seed(cfg.uint64("seed"), stream); }

// ---------------------------------------------------------------------------
// Exact tables with caching
// ---------------------------------------------------------------------------

struct PlusTables {
  std::vector<DyadicProb> b_plus;
  std::vector<DyadicProb> irreducible;
};

PlusTables plus_tables(Context& ctx, int L0, int n_max, std::uint64_t budget) {
  TableCache& cache = ctx.table_cache();
  ctx.used_cache = true;
  PlusTables t;
  t.b_plus.assign(static_cast<std::size_t>(n_max) + 1, DyadicProb::zero());
  t.irreducible.assign(static_cast<std::size_t>(n_max) + 1, DyadicProb::zero());
  t.b_plus[0] = DyadicProb::one();
  std::uint64_t nodes = 0;
  for (int n = 1; n <= n_max; ++n) {
    const CacheKey kb{L0, n, "B+", json::object()};
    const CacheKey kl{L0, n, "L", json::object()};
    auto b = cache.lookup(kb);
    auto l = cache.lookup(kl);
    if (!b || !l) {
      ctx.all_cached = false;
      const auto e = enumeration::enumerate_b_plus(n, L0, budget);
      nodes += e.nodes;
      b = e.b_plus;
      l = e.irreducible;
      cache.store(kb, *b);
      cache.store(kl, *l);
    }
    t.b_plus[static_cast<std::size_t>(n)] = *b;
    t.irreducible[static_cast<std::size_t>(n)] = *l;
  }
  ctx.diagnostics["plus_nodes"] = nodes;
  return t;
}

enumeration::BTable b_table(Context& ctx, const enumeration::EnumConfig& ec) {
  TableCache& cache = ctx.table_cache();
  ctx.used_cache = true;
  const json trunc = {{"max_len", ec.max_len}, {"max_depth", ec.max_depth}};
  enumeration::BTable table;
  table.config = ec;
  bool complete = true;
  for (int n = 0; n <= ec.n_max && complete; ++n) {
    const auto lo = cache.lookup({ec.L0, n, "B_lower", trunc});
    const auto hi = cache.lookup({ec.L0, n, "B_upper", trunc});
    if (!lo || !hi) {
      complete = false;
      break;
    }
    enumeration::BBracket row;
    row.n = n;
    row.interval = {*lo, *hi};
    table.rows.push_back(row);
  }
  if (complete) return table;
  ctx.all_cached = false;
  table = enumeration::enumerate_B(ec);
  for (const auto& row : table.rows) {
    cache.store({ec.L0, row.n, "B_lower", trunc}, row.interval.lower);
    cache.store({ec.L0, row.n, "B_upper", trunc}, row.interval.upper);
  }
  ctx.diagnostics["b_nodes"] = table.nodes;
  json tails = json::array();
  for (const auto& row : table.rows) {
    tails.push_back({{"n", row.n},
                     {"frontier", row.tail_frontier.to_double()},
                     {"geometric", row.tail_geometric.to_double()},
                     {"horizon", row.tail_horizon}});
  }
  ctx.diagnostics["b_tails"] = tails;
  return table;
}

json inequalities(const enumeration::InequalityReport& r) {
  return {{"submultiplicative_checks", r.submultiplicative_checks},
          {"submultiplicative_violations", r.submultiplicative_violations},
          {"doubling_checks", r.doubling_checks},
          {"doubling_violations", r.doubling_violations},
          {"ok", r.ok()}};
}

int resolve_max_len(const RunConfig& cfg, int L0) {
  if (cfg.has("max_len")) return cfg.int32("max_len");
  return L0 <= 2 ? 48 : (L0 == 3 ? 36 : 28);
}

json truncation(const enumeration::EnumConfig& ec) {
  return {{"max_len", ec.max_len}, {"max_depth", ec.max_depth}};
}

json run_enumerate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  enumeration::EnumConfig ec;
  ec.L0 = cfg.int32("L0");
  ec.n_max = cfg.int32("n_max");
  ec.max_len = resolve_max_len(cfg, ec.L0);
  ec.max_depth = cfg.int32("max_depth");
  ec.node_budget = cfg.uint64("node_budget");
  ec.threads = ctx.threads;
  ec.validate();
  lattice::EventParams{ec.L0, ec.n_max}.validate();
  const auto plus = plus_tables(ctx, ec.L0, ec.n_max, ec.node_budget);
  const auto table = b_table(ctx, ec);
  json rows = json::array();
  for (int n = 0; n <= ec.n_max; ++n) {
    const auto i = static_cast<std::size_t>(n);
    rows.push_back({{"n", n},
                    {"b_plus", exact(plus.b_plus[i])},
                    {"irreducible", exact(plus.irreducible[i])},
                    {"b", interval(table.rows[i].interval)}});
  }
  return {{"L0", ec.L0},
          {"truncation", truncation(ec)},
          {"rows", rows},
          {"inequalities", inequalities(enumeration::check_inequalities(table))}};
}

json run_renewal(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int L0 = cfg.int32("L0");
  const int n_max = cfg.int32("n_max");
  lattice::EventParams{L0, n_max}.validate();
  const auto plus = plus_tables(ctx, L0, n_max, cfg.uint64("node_budget"));
  const auto report = enumeration::renewal_check(plus.b_plus, plus.irreducible, L0);
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"n", row.n}, {"lhs", exact(row.lhs)}, {"rhs", exact(row.rhs)}, {"pass", row.pass}});
  }
  if (!report.all_pass()) log::warn("renewal identity failed for at least one n");
  return {{"L0", L0}, {"rows", rows}, {"all_pass", report.all_pass()}};
}

json run_constants(Context& ctx) {
  const auto& cfg = ctx.cfg;
  enumeration::EnumConfig ec;
  ec.L0 = cfg.int32("L0");
  ec.n_max = cfg.int32("n_max");
  ec.max_len = resolve_max_len(cfg, ec.L0);
  ec.max_depth = cfg.int32("max_depth");
  ec.node_budget = cfg.uint64("node_budget");
  ec.threads = ctx.threads;
  const auto r = enumeration::constants_report(ec.L0, ec);
  json roots = json::array();
  for (const auto& [n, root] : r.c4.roots) roots.push_back({{"n_max", n}, {"root", root}});
  json b_plus = json::array();
  json prob_L = json::array();
  json prob_B = json::array();
  for (std::size_t n = 0; n < r.prob_b_plus.size(); ++n) {
    b_plus.push_back(exact(r.prob_b_plus[n]));
    prob_L.push_back(exact(r.prob_L[n]));
    prob_B.push_back(interval(r.prob_B[n]));
  }
  if (!r.c4.monotone) log::warn("truncated roots are not monotone in n_max");
  ctx.diagnostics["nodes"] = r.nodes;
  return {{"L0", r.L0},
          {"truncation", truncation(ec)},
          {"C4", {{"point", r.c4.point}, {"low", r.c4.low}, {"high", r.c4.high}, {"roots", roots},
                  {"monotone", r.c4.monotone}}},
          {"C4_certified_lower", r.c4_certified_lower},
          {"C4_certified_lower_n", r.c4_certified_lower_n},
          {"mu_hat", r.mu_hat},
          {"C5_hat", r.C5_hat},
          {"C6_hat", r.C6_hat},
          {"C3_witness", r.C3_witness},
          {"C7_bracket", {r.C7_bracket.first, r.C7_bracket.second}},
          {"f", r.f},
          {"u", r.u},
          {"u_variation_last_third", r.u_variation_last_third},
          {"prob_b_plus", b_plus},
          {"prob_L", prob_L},
          {"prob_B", prob_B},
          {"inequalities", inequalities(r.inequalities)}};
}

// ---------------------------------------------------------------------------
// Limit measure Q
// ---------------------------------------------------------------------------

double resolve_c4(Context& ctx, int L0) {
  if (ctx.cfg.has("c4")) return ctx.cfg.real("c4");
  if (L0 == 2) return std::log(4.0 * (std::sqrt(2.0) - 1.0));
  const auto est = enumeration::estimate_C4(L0, 10);
  log::warn("c4 for L0 = " + std::to_string(L0) + " taken from the truncated root at n_max = 10 (" +
            std::to_string(est.point) + ")");
  return est.point;
}

struct QTables {
  regen::ExcursionTable first;
  regen::ExcursionTable rest;
};

QTables q_tables(Context& ctx, int L0, int m_max) {
  const double c4 = resolve_c4(ctx, L0);
  return {regen::build_excursion_table(L0, c4, m_max, regen::ExcursionClass::M_tilde),
          regen::build_excursion_table(L0, c4, m_max, regen::ExcursionClass::M)};
}

json table_summary(const regen::ExcursionTable& t) {
  return {{"class", regen::to_string(t.cls)},
          {"entries", t.entries.size()},
          {"Z_trunc", t.Z_trunc},
          {"truncated_mass_fraction", t.truncated_mass_fraction}};
}

json run_sample_q(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int L0 = cfg.int32("L0");
  const int m_max = cfg.int32("m_max");
  const auto tables = q_tables(ctx, L0, m_max);
  const auto path = regen::sample_regen_path(tables.first, tables.rest, cfg.uint64("num_excursions"), cfg.uint64("seed"));
  std::ostringstream csv;
  csv << "j,nu_j,sigma_j\n";
  for (std::size_t j = 0; j < path.nu.size(); ++j) csv << j + 1 << ',' << path.nu[j] << ',' << path.sigma[j] << '\n';
  ctx.csv.push_back({"sample_q.csv", "j,nu_j,sigma_j", csv.str()});
  const double level = path.nu.empty() ? 0.0 : path.nu.back();
  const double time = path.sigma.empty() ? 0.0 : static_cast<double>(path.sigma.back());
  return {{"L0", L0},
          {"c4", tables.rest.c4},
          {"m_max", m_max},
          {"first_table", table_summary(tables.first)},
          {"table", table_summary(tables.rest)},
          {"num_excursions", path.nu.size()},
          {"nu", path.nu},
          {"sigma", path.sigma},
          {"final_level", level},
          {"final_time", time},
          {"empirical_speed", time > 0 ? level / time : 0.0}};
}

json run_speed(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int L0 = cfg.int32("L0");
  const auto tables = q_tables(ctx, L0, cfg.int32("m_max"));
  const auto s = regen::estimate_speed(tables.first, tables.rest, cfg.uint64("num_excursions"),
                                       cfg.uint64("num_replicas"), cfg.uint64("seed"), ctx.threads);
  const double bound = 1.0 / L0;
  return {{"L0", s.L0},
          {"c4", s.c4},
          {"m_max", s.m_max},
          {"gamma_hat", s.gamma_hat},
          {"ci_low", s.ci_low},
          {"ci_high", s.ci_high},
          {"confidence", s.confidence},
          {"replica_gamma", s.replica_gamma},
          {"regression_slope", s.regression_slope},
          {"table_speed", s.table_speed},
          {"truncated_mass_fraction", s.truncated_mass_fraction},
          {"lower_bound", bound},
          {"exceeds_lower_bound", s.ci_low > bound}};
}

LatticePath parse_cylinder(const std::string& text) {
  std::vector<int> steps;
  for (char c : text) {
    if (c == '+') {
      steps.push_back(1);
    } else if (c == '-') {
      steps.push_back(-1);
    } else {
      throw SchemaError("cylinder '" + text + "' must consist of '+' and '-'");
    }
  }
  if (steps.empty()) throw SchemaError("empty cylinder");
  std::vector<lattice::Step> out(steps.begin(), steps.end());
  return LatticePath(std::move(out));
}

std::string cylinder_text(const LatticePath& p) {
  std::string s;
  for (auto step : p.steps()) s.push_back(step > 0 ? '+' : '-');
  return s;
}

json run_reject_rw(Context& ctx) {
  const auto& cfg = ctx.cfg;
  regen::RejectionConfig rc;
  rc.r = cfg.int32("r");
  rc.L0 = cfg.int32("L0");
  rc.num_accepted = cfg.uint64("num_accepted");
  rc.max_attempts = cfg.uint64("max_attempts");
  rc.seed = stream_seed(cfg, 0);
  rc.threads = ctx.threads;
  rc.keep_paths = false;
  const auto res = regen::rejection_conditional(rc);
  json out = {{"L0", rc.L0},
              {"r", rc.r},
              {"num_accepted", res.num_accepted},
              {"attempts", res.attempts},
              {"acceptance_rate", res.acceptance_rate()},
              {"acceptance_std_error", res.acceptance_std_error()},
              {"plus_first_fraction",
               res.num_accepted ? static_cast<double>(res.plus_first) / static_cast<double>(res.num_accepted) : 0.0}};
  if (rc.r <= 4) {
    enumeration::EnumConfig ec;
    ec.L0 = rc.L0;
    ec.n_max = rc.r;
    ec.threads = ctx.threads;
    const auto bracket = enumeration::prob_B(rc.r, ec);
    const double lo = bracket.lower.to_double();
    const double hi = bracket.upper.to_double();
    const double p = res.acceptance_rate();
    const double gap = p < lo ? lo - p : (p > hi ? p - hi : 0.0);
    const double se = res.acceptance_std_error();
    const double sigmas = se > 0 ? gap / se : (gap > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    out["bracket"] = {{"lower", lo}, {"upper", hi}, {"distance_sigmas", sigmas}, {"within_3_sigma", sigmas <= 3.0}};
  }
  const auto names = cfg.string_list("cylinders");
  const auto r_list = cfg.integer_list("r_list");
  if (!names.empty() && !r_list.empty()) {
    std::vector<LatticePath> cylinders;
    for (const auto& n : names) cylinders.push_back(parse_cylinder(n));
    const auto tables = q_tables(ctx, rc.L0, cfg.int32("m_max"));
    const auto diag = regen::cylinder_diagnostics(cylinders, r_list, rc.L0, rc.num_accepted, stream_seed(cfg, 1),
                                                  tables.first, tables.rest, ctx.threads);
    json rows = json::array();
    for (const auto& row : diag.rows) {
      json points = json::array();
      for (const auto& pt : row.points) {
        points.push_back({{"r", pt.r}, {"hits", pt.hits}, {"samples", pt.samples}, {"estimate", pt.estimate},
                          {"std_error", pt.std_error}});
      }
      rows.push_back({{"cylinder", cylinder_text(row.cylinder)},
                      {"points", points},
                      {"q_value", row.q_value},
                      {"monotone", row.monotone},
                      {"stabilized", row.stabilized},
                      {"divergent", row.divergent}});
    }
    out["cylinder_diagnostics"] = {{"r_list", r_list}, {"rows", rows}, {"all_stabilized", diag.all_stabilized()}};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bessel numerics
// ---------------------------------------------------------------------------

json run_bessel(Context& ctx) {
  bessel::QuadratureConfig q;
  q.abs_tol = ctx.cfg.real("quad_tol");
  q.max_subdivisions = ctx.cfg.int32("max_subdivisions");
  q.validate();
  const auto c = bessel::constants_continuous(q);
  const auto root = bessel::find_j0();
  const auto m0 = bessel::compute_m0(q);
  return {{"j0", c.j0},
          {"j0_bracket", {root.lo, root.hi}},
          {"dj0", c.dj0},
          {"lambda0", c.lambda0},
          {"C", c.C},
          {"m0", c.m0},
          {"m0_ratio", m0.ratio},
          {"m0_closed", m0.closed},
          {"m0_agreement", std::abs(m0.ratio - m0.closed)},
          {"gamma0", c.gamma0},
          {"schafheitlin_residual_mu1", bessel::schafheitlin_residual(1.0, c.j0, q)},
          {"orthogonality_residual", bessel::orthogonality_residual(q)},
          {"density_moment_4", bessel::invariant_density_moment(4, q)},
          {"root_tolerance", c.root_tolerance},
          {"quadrature", {{"abs_tol", q.abs_tol}, {"max_subdivisions", q.max_subdivisions}}}};
}

json run_gamma0(Context&) {
  const auto root = bessel::find_j0();
  const double g = bessel::compute_gamma0();
  return {{"gamma0", g}, {"j0", root.j0}, {"j0_bracket", {root.lo, root.hi}}, {"m0", 1.0 / g}};
}

// ---------------------------------------------------------------------------
// Diffusions
// ---------------------------------------------------------------------------

json moment_rows(const std::vector<diffusion::MomentRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"t", r.t}, {"mean", r.mean}, {"variance", r.variance}, {"mean_std_error", r.mean_std_error},
                   {"expected_mean", r.expected_mean}, {"expected_variance", r.expected_variance},
                   {"mean_z", r.mean_z}, {"variance_z", r.variance_z}});
  }
  return out;
}

json run_sde_ergodic(Context& ctx) {
  const auto& cfg = ctx.cfg;
  diffusion::DiskConfig dc;
  dc.T = cfg.real("T");
  dc.dt = cfg.real("dt");
  dc.r0 = cfg.real("r0");
  dc.seed = cfg.uint64("seed");
  const auto rep = diffusion::sde_ergodic(dc, cfg.uint64("num_replicas"), ctx.threads, cfg.int32("density_bins"));
  std::ostringstream csv;
  csv.precision(17);
  csv << "t,value\n";
  for (std::size_t i = 0; i < rep.first_path.values.size(); ++i) {
    csv << static_cast<double>(i) * rep.first_path.dt << ',' << rep.first_path.values[i] << '\n';
  }
  ctx.csv.push_back({"sde_ergodic.csv", "t,value", csv.str()});
  return {{"replica_averages", rep.replica_averages},
          {"mean", rep.mean},
          {"std_error", rep.std_error},
          {"m0", rep.m0},
          {"abs_error", rep.abs_error},
          {"tolerance", rep.tolerance},
          {"pass", rep.pass},
          {"density",
           {{"samples", rep.density_samples}, {"bins", rep.density_bins}, {"chi_square", rep.chi_square},
            {"critical_5pct", rep.chi_square_critical}, {"pass", rep.density_pass}}}};
}

json rk_rows(const std::vector<diffusion::RayKnightRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"x", r.x}, {"level", r.level}, {"mean", r.mean}, {"variance", r.variance},
                   {"expected_mean", r.expected_mean}, {"expected_variance", r.expected_variance},
                   {"binned_expected_variance", r.binned_expected_variance},
                   {"mean_rel_error", r.mean_rel_error}, {"variance_rel_error", r.variance_rel_error},
                   {"zero_fraction", r.zero_fraction}, {"expected_zero_fraction", r.expected_zero_fraction}});
  }
  return out;
}

json run_ray_knight(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto rep = diffusion::ray_knight_check(cfg.real("a"), cfg.real("dt"), cfg.real("h"), cfg.uint64("num_paths"),
                                               cfg.uint64("seed"), cfg.real("window_low"), ctx.threads);
  return {{"a", rep.a},
          {"dt", rep.dt},
          {"h", rep.h},
          {"window_low", rep.window_low},
          {"num_paths", rep.num_paths},
          {"besq_rows", rk_rows(rep.besq_rows)},
          {"feller_rows", rk_rows(rep.feller_rows)},
          {"max_mean_rel_error", rep.max_mean_rel_error},
          {"max_variance_rel_error", rep.max_variance_rel_error},
          {"max_occupation_rel_error", rep.max_occupation_rel_error},
          {"mean_tolerance", rep.mean_tolerance},
          {"variance_tolerance", rep.variance_tolerance},
          {"pass", rep.pass}};
}

std::function<double(double)> barrier(const std::string& text) {
  if (text == "inf" || text == "+inf") {
    return [](double) { return std::numeric_limits<double>::infinity(); };
  }
  std::size_t used = 0;
  double level = 0.0;
  try {
    level = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(level > 0.0) || !std::isfinite(level)) {
    throw SchemaError("barrier '" + text + "' must be a positive number or inf");
  }
  return [level](double) { return level; };
}

json run_dominance(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<std::pair<std::string, std::string>> cases;
  const std::string f = cfg.string("f");
  const std::string g = cfg.string("g");
  if (f.empty() && g.empty()) {
    cases = {{"inf", "1"}, {"1", "1"}, {"1", "0.5"}};
  } else if (f.empty() || g.empty()) {
    throw SchemaError("dominance needs both f and g, or neither");
  } else {
    cases = {{f, g}};
  }
  json out = json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    diffusion::DominanceConfig dc;
    dc.f = barrier(cases[i].first);
    dc.g = barrier(cases[i].second);
    dc.f_label = cases[i].first;
    dc.g_label = cases[i].second;
    dc.T = cfg.real("T");
    dc.y0 = cfg.real("y0");
    dc.dt = cfg.real("dt");
    dc.num_accepted = cfg.uint64("num_accepted");
    dc.alpha = cfg.real("alpha");
    dc.seed = stream_seed(cfg, i);
    dc.threads = ctx.threads;
    const auto r = diffusion::dominance_test(dc);
    all_pass = all_pass && r.pass;
    out.push_back({{"f", r.f_label}, {"g", r.g_label}, {"T", r.T}, {"y0", r.y0}, {"probe_time", r.probe_time},
                   {"n_f", r.n_f}, {"n_g", r.n_g}, {"attempts_f", r.attempts_f}, {"attempts_g", r.attempts_g},
                   {"discrepancy", r.discrepancy}, {"critical_value", r.critical_value}, {"alpha", r.alpha},
                   {"mean_f", r.mean_f}, {"mean_g", r.mean_g}, {"pass", r.pass}});
  }
  return {{"cases", out}, {"all_pass", all_pass}};
}

json run_reject_bm(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double dt = cfg.real("dt");
  const double h = cfg.has("h") ? cfg.real("h") : 10.0 * std::sqrt(dt);
  const auto a_list = cfg.real_list("a_list");
  json rows = json::array();
  std::vector<double> tau;
  std::vector<double> sup;
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    const auto r = diffusion::reject_bm_bounded_localtime(a_list[i], dt, h, cfg.uint64("num_accepted"),
                                                          stream_seed(cfg, i), cfg.uint64("max_attempts"), ctx.threads);
    tau.push_back(r.mean_tau_over_a);
    sup.push_back(r.mean_sup_local_time);
    rows.push_back({{"a", r.a}, {"num_accepted", r.num_accepted}, {"attempts", r.attempts},
                    {"acceptance_rate", r.acceptance_rate}, {"mean_tau_over_a", r.mean_tau_over_a},
                    {"tau_over_a_std_error", r.tau_over_a_std_error},
                    {"mean_sup_local_time", r.mean_sup_local_time},
                    {"sup_local_time_std_error", r.sup_local_time_std_error},
                    {"max_sup_local_time", r.max_sup_local_time}});
  }
  const auto decreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] < v[i - 1])) return false;
    }
    return true;
  };
  return {{"dt", dt},
          {"h", h},
          {"rows", rows},
          {"tau_over_a_decreasing", decreasing(tau)},
          {"sup_local_time_decreasing", decreasing(sup)}};
}

json run_feller(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double y0 = cfg.real("y0");
  const double dt = cfg.real("dt");
  const auto paths = cfg.uint64("num_paths");
  const double T_max = cfg.real("T_max");
  const auto moments = diffusion::besq_moments(0, y0, cfg.real_list("times"), dt, paths, stream_seed(cfg, 0), ctx.threads);
  bool martingale_pass = true;
  for (const auto& m : moments) martingale_pass = martingale_pass && std::abs(m.mean_z) <= 3.0;
  json sup = json::array();
  bool sup_pass = true;
  const auto deltas = cfg.real_list("delta_list");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] >= 1.0) throw SchemaError("delta_list entries must lie in (0, 1)");
    const auto s = diffusion::feller_sup_below(1.0 - deltas[i], 1.0, dt, paths, stream_seed(cfg, 1 + i), T_max, ctx.threads);
    const bool pass = std::abs(s.z) <= 3.0;
    sup_pass = sup_pass && pass;
    sup.push_back({{"delta", deltas[i]}, {"y0", s.y0}, {"stayed_below", s.stayed_below}, {"unresolved", s.unresolved},
                   {"estimate", s.estimate}, {"std_error", s.std_error}, {"expected", s.expected}, {"z", s.z},
                   {"pass", pass}});
  }
  const auto area = diffusion::feller_area_tail(cfg.real_list("z_grid"), y0, paths, stream_seed(cfg, 100), dt, T_max,
                                                ctx.threads);
  json tail = json::array();
  for (const auto& t : area.tail) {
    tail.push_back({{"z", t.z}, {"estimate", t.estimate}, {"ci_low", t.ci_low}, {"ci_high", t.ci_high}});
  }
  return {{"martingale", {{"rows", moment_rows(moments)}, {"pass", martingale_pass}, {"z_tolerance", 3.0}}},
          {"sup_below", {{"rows", sup}, {"pass", sup_pass}, {"z_tolerance", 3.0}}},
          {"area_tail",
           {{"y0", area.y0}, {"absorbed_fraction", area.absorbed_fraction}, {"tail", tail}, {"monotone", area.monotone},
            {"confidence", 0.95}}}};
}

using Handler = json (*)(Context&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"enumerate", run_enumerate},     {"renewal-check", run_renewal}, {"constants", run_constants},
      {"sample-q", run_sample_q},       {"speed", run_speed},           {"reject-rw", run_reject_rw},
      {"bessel", run_bessel},           {"gamma0", run_gamma0},         {"sde-ergodic", run_sde_ergodic},
      {"ray-knight", run_ray_knight},   {"dominance", run_dominance},   {"reject-bm", run_reject_bm},
      {"feller", run_feller},
  };
  return h;
}

void write_file(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + file.string());
}

}  // namespace

RunOutput run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  log::WarningCapture warnings;
  Context ctx(config);
  ctx.threads = config.int32("threads");
  const auto it = handlers().find(config.subcommand());
  if (it == handlers().end()) throw SchemaError("unknown subcommand '" + config.subcommand() + "'");
  json results = it->second(ctx);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunOutput out;
  if (ctx.used_cache && ctx.cache) {
    ctx.diagnostics["cache"] = {{"enabled", ctx.cache->enabled()},
                                {"dir", ctx.cache->enabled() ? ctx.cache->dir().string() : ""},
                                {"hits", ctx.cache->hits()},
                                {"misses", ctx.cache->misses()}};
  }
  const bool cached = ctx.used_cache && ctx.cache && ctx.cache->enabled() && ctx.all_cached;
  json artifacts = json::array();
  const std::string dir = config.string("output_dir");
  if (config.boolean("csv")) out.csv = std::move(ctx.csv);
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    for (const auto& a : out.csv) {
      write_file(fs::path(dir) / a.name, a.content);
      artifacts.push_back(a.name);
    }
    artifacts.push_back("report.json");
  }
  out.report = {{"tool", kToolName},
                {"version", kToolVersion},
                {"subcommand", config.subcommand()},
                {"config", config.values()},
                {"input_hash", config.input_hash()},
                {"provenance", cached ? "cached" : "computed"},
                {"results", std::move(results)},
                {"diagnostics", std::move(ctx.diagnostics)},
                {"warnings", warnings.messages()},
                {"wall_clock_seconds", seconds},
                {"artifacts", artifacts}};
  if (!dir.empty()) write_file(fs::path(dir) / "report.json", out.report.dump(2) + "\n");
  return out;
}

RunOutput run(const json& raw) { return run(RunConfig::from_json(raw)); }

json error_record(const std::exception_ptr& failure) {
  json err = {{"code", "internal"}, {"status", static_cast<int>(ErrorCode::internal)}, {"message", "unknown error"},
              {"partial", nullptr}};
  try {
    std::rethrow_exception(failure);
  } catch (const TimeoutError& e) {
    err["code"] = error_code_name(e.code());
    err["status"] = static_cast<int>(e.code());
    err["message"] = e.what();
    err["partial"] = {{"accepted", e.accepted()}, {"attempts", e.attempts()}};
  } catch (const Error& e) {
    err["code"] = error_code_name(e.code());
    err["status"] = static_cast<int>(e.code());
    err["message"] = e.what();
  } catch (const json::exception& e) {
    err["code"] = error_code_name(ErrorCode::schema);
    err["status"] = static_cast<int>(ErrorCode::schema);
    err["message"] = e.what();
  } catch (const std::exception& e) {
    err["message"] = e.what();
  } catch (...) {
  }
  return {{"error", err}};
}

int error_status(const std::exception_ptr& failure) {
  return error_record(failure)["error"]["status"].get<int>();
}

}  // namespace blt::runner
