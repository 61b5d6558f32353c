// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion 1-12. Pass criterion
// numbers as arguments to run a subset. Exit status is the number of failed
// criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "bessel/bessel_numerics.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "diffusion/diffusion_sim.hpp"
#include "enumeration/exact_enum.hpp"
#include "regen/regen_sampler.hpp"
#include "runner/runner.hpp"

namespace {

using namespace blt;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. gamma0 through the runner
Outcome gamma0_reproduction() {
  const auto start = Clock::now();
  const auto out = runner::run(nlohmann::json{{"subcommand", "gamma0"}, {"no_cache", true}});
  const double t = seconds_since(start);
  const double g = out.report["results"]["gamma0"].get<double>();
  const double err = std::abs(g - 4.5860);
  return {err < 5e-4 && t < 1.0, fmt("gamma0 = %.6f, |gamma0 - 4.5860| = %.2e (tol 5e-4), %.3f s (limit 1 s)", g, err, t)};
}

// 2. j0 with a certified sign bracket
Outcome j0_reproduction() {
  const auto root = bessel::find_j0();
  const double err = std::abs(root.j0 - 2.4048);
  const double width = root.hi - root.lo;
  const bool bracket = bessel::bessel_j0(root.lo) > 0.0 && bessel::bessel_j0(root.hi) <= 0.0 && root.lo <= root.j0 &&
                       root.j0 <= root.hi;
  return {err < 1e-4 && width <= 1e-12 && bracket,
          fmt("j0 = %.15f, |j0 - 2.4048| = %.2e (tol 1e-4), bracket width %.1e (<= 1e-12), sign change %s", root.j0,
              err, width, bracket ? "certified" : "MISSING")};
}

// 3. Bessel identities
Outcome identity_suite() {
  const auto start = Clock::now();
  const double j0 = bessel::find_j0().j0;
  const double schaf = bessel::schafheitlin_residual(1.0, j0);
  const double orth = bessel::orthogonality_residual();
  double agree = 1.0;
  try {
    const auto m0 = bessel::compute_m0();
    agree = std::abs(m0.ratio - m0.closed);
  } catch (const Error&) {
  }
  const double t = seconds_since(start);
  return {schaf < 1e-9 && orth < 1e-9 && agree < 1e-8 && t < 5.0,
          fmt("Schafheitlin %.2e (< 1e-9), orthogonality %.2e (< 1e-9), m0 ratio vs closed %.2e (< 1e-8), %.2f s (< 5 s)",
              schaf, orth, agree, t)};
}

// 4. renewal identity, exact
Outcome renewal_identity() {
  const auto start = Clock::now();
  std::size_t rows = 0;
  std::size_t failures = 0;
  for (int L0 : {2, 3}) {
    const auto rep = enumeration::renewal_check(10, L0);
    for (const auto& r : rep.rows) {
      ++rows;
      if (!r.pass || !(r.lhs == r.rhs)) ++failures;
    }
  }
  const double t = seconds_since(start);
  return {failures == 0 && rows == 20 && t < 120.0,
          fmt("%zu of %zu rows (n = 1..10, L0 in {2,3}) differ in exact arithmetic, %.2f s (< 120 s)", failures, rows,
              t)};
}

enumeration::EnumConfig table_config(int L0) {
  enumeration::EnumConfig ec;
  ec.L0 = L0;
  ec.n_max = 14;
  ec.max_len = L0 == 2 ? 48 : 36;
  ec.max_depth = 16;
  ec.node_budget = 2'000'000'000;
  return ec;
}

// 5. submultiplicativity and the 2^s bound
Outcome inequalities() {
  std::size_t checks = 0;
  std::size_t violations = 0;
  for (int L0 : {2, 3}) {
    const auto rep = enumeration::check_inequalities(enumeration::enumerate_B(table_config(L0)));
    checks += rep.submultiplicative_checks + rep.doubling_checks;
    violations += rep.submultiplicative_violations + rep.doubling_violations;
  }
  return {violations == 0 && checks > 0,
          fmt("%zu violations over %zu exact checks (L0 in {2,3}, n <= 14)", violations, checks)};
}

// 6. truncated roots and renewal-sequence convergence
Outcome c4_consistency() {
  bool ok = true;
  std::string detail;
  for (int L0 : {2, 3}) {
    const auto rep = enumeration::constants_report(L0, table_config(L0));
    std::vector<double> roots;
    for (int n : {8, 10, 12, 14}) {
      const auto it = std::find_if(rep.c4.roots.begin(), rep.c4.roots.end(), [n](const auto& p) { return p.first == n; });
      roots.push_back(it == rep.c4.roots.end() ? std::nan("") : it->second);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < roots.size(); ++i) decreasing = decreasing && roots[i] < roots[i - 1];
    bool in_range = true;
    for (double r : roots) in_range = in_range && r > 0.0 && r <= std::log(2.0);
    const bool flat = rep.u_variation_last_third < 0.10;
    ok = ok && decreasing && in_range && flat;
    detail += fmt("L0=%d roots %.6f %.6f %.6f %.6f (%s, %s), u variation %.2e (< 0.10); ", L0, roots[0], roots[1],
                  roots[2], roots[3], decreasing ? "decreasing" : "NOT decreasing",
                  in_range ? "in (0, log 2]" : "OUT OF RANGE", rep.u_variation_last_third);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 7. speed bound at L0 = 2
Outcome speed_bound() {
  const auto start = Clock::now();
  const double c4 = std::log(4.0 * (std::sqrt(2.0) - 1.0));
  const auto first = regen::build_excursion_table(2, c4, 18, regen::ExcursionClass::M_tilde);
  const auto table = regen::build_excursion_table(2, c4, 18, regen::ExcursionClass::M);
  std::vector<regen::SpeedEstimate> runs;
  double t = seconds_since(start);  // table construction counts towards every run
  const double build = t;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto run_start = Clock::now();
    runs.push_back(regen::estimate_speed(first, table, 100'000, 8, seed));
    t = std::max(t, build + seconds_since(run_start));
  }
  bool above = true;
  bool overlap = true;
  for (const auto& a : runs) {
    above = above && a.ci_low > 0.5;
    for (const auto& b : runs) overlap = overlap && a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
  }
  return {above && overlap && t < 60.0,
          fmt("gamma_hat = %.5f, 99%% CI [%.5f, %.5f] (ci_low > 0.5), 3 seeds: CIs %s, slowest run %.1f s (< 60 s)",
              runs[0].gamma_hat, runs[0].ci_low, runs[0].ci_high, overlap ? "mutually overlap" : "DISAGREE", t)};
}

// 8. rejection sampler vs exact bracket, cylinder stabilization
Outcome conditional_law() {
  regen::RejectionConfig rc;
  rc.r = 1;
  rc.L0 = 2;
  rc.num_accepted = 20'000;
  rc.seed = 8;
  rc.keep_paths = false;
  const auto res = regen::rejection_conditional(rc);
  enumeration::EnumConfig ec;
  ec.L0 = 2;
  ec.n_max = 1;
  const auto bracket = enumeration::prob_B(1, ec);
  const double p = res.acceptance_rate();
  const double se = res.acceptance_std_error();
  const double lo = bracket.lower.to_double();
  const double hi = bracket.upper.to_double();
  const double gap = p < lo ? lo - p : (p > hi ? p - hi : 0.0);
  const bool rate_ok = gap <= 3.0 * se;

  const double c4 = std::log(4.0 * (std::sqrt(2.0) - 1.0));
  const auto first = regen::build_excursion_table(2, c4, 18, regen::ExcursionClass::M_tilde);
  const auto table = regen::build_excursion_table(2, c4, 18, regen::ExcursionClass::M);
  const std::vector<lattice::LatticePath> cylinders = {lattice::LatticePath{1}, lattice::LatticePath{1, 1},
                                                       lattice::LatticePath{1, -1, 1}, lattice::LatticePath{-1}};
  const auto diag = regen::cylinder_diagnostics(cylinders, {6, 8, 10}, 2, 4000, 88, first, table);
  return {rate_ok && diag.all_stabilized(),
          fmt("acceptance %.5f +- %.5f vs P(B_1) in [%.6f, %.6f] (%.2f sigma, limit 3); cylinders at r = 6, 8, 10 %s",
              p, se, lo, hi, se > 0 ? gap / se : 0.0, diag.all_stabilized() ? "stabilized" : "NOT stabilized")};
}

// 9. disk-conditioned ergodic average
Outcome ergodic() {
  const auto start = Clock::now();
  diffusion::DiskConfig dc;
  dc.T = 1e4;
  dc.dt = 1e-4;
  dc.seed = 9;
  dc.record_every = dc.T;
  const auto rep = diffusion::sde_ergodic(dc, 8);
  const double t = seconds_since(start);
  return {rep.abs_error < 0.01 && t < 600.0,
          fmt("time average of |Z|^2 = %.5f +- %.5f vs m0 = %.7f, |diff| = %.2e (< 0.01), %.0f s (< 600 s)", rep.mean,
              rep.std_error, rep.m0, rep.abs_error, t)};
}

// 10. Ray-Knight
Outcome ray_knight() {
  const auto rep = diffusion::ray_knight_check(2.0, 2.5e-5, 0.05, 10'000, 10);
  const bool ok = rep.max_mean_rel_error <= 0.05 && rep.max_variance_rel_error <= 0.10;
  return {ok, fmt("a = 2, 1e4 paths, x in [0.4, 2]: max mean rel error %.4f (<= 0.05), max variance rel error %.4f "
                  "(<= 0.10)",
                  rep.max_mean_rel_error, rep.max_variance_rel_error)};
}

// 11. dominance suite
Outcome dominance() {
  const double inf = std::numeric_limits<double>::infinity();
  struct Case {
    const char* f_label;
    const char* g_label;
    double f;
    double g;
  };
  const Case cases[] = {{"inf", "1", inf, 1.0}, {"1", "1", 1.0, 1.0}, {"1", "0.5", 1.0, 0.5}};
  bool ok = true;
  std::string detail;
  std::uint64_t stream = 0;
  for (const auto& c : cases) {
    diffusion::DominanceConfig dc;
    dc.f = [v = c.f](double) { return v; };
    dc.g = [v = c.g](double) { return v; };
    dc.f_label = c.f_label;
    dc.g_label = c.g_label;
    dc.T = 2.0;
    dc.y0 = 0.1;
    dc.num_accepted = 300;
    dc.alpha = 0.01;
    dc.seed = derive_seed(11, stream++);
    const auto r = diffusion::dominance_test(dc);
    ok = ok && r.pass;
    detail += fmt("f=%s g=%s D+ %.3f vs %.3f %s; ", c.f_label, c.g_label, r.discrepancy, r.critical_value,
                  r.pass ? "not rejected" : "REJECTED");
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 12. Feller martingale and extinction controls
Outcome feller_controls() {
  const auto rows = diffusion::besq_moments(0, 1.0, {0.5, 1.0, 2.0}, 1e-4, 10'000, 12);
  double worst_mean = 0.0;
  for (const auto& r : rows) worst_mean = std::max(worst_mean, std::abs(r.mean_z));
  double worst_sup = 0.0;
  std::string sup_detail;
  std::uint64_t stream = 1;
  for (double delta : {0.2, 0.5}) {
    const auto s = diffusion::feller_sup_below(1.0 - delta, 1.0, 1e-4, 10'000, derive_seed(12, stream++));
    worst_sup = std::max(worst_sup, std::abs(s.z));
    sup_detail += fmt(", P(sup < 1 | 1-%.1f) = %.4f (z %.2f)", delta, s.estimate, s.z);
  }
  return {worst_mean <= 3.0 && worst_sup <= 3.0,
          fmt("mean at t = 0.5, 1, 2: max |z| %.2f (<= 3)", worst_mean) + sup_detail + " (|z| <= 3)"};
}

}  // namespace

int main(int argc, char** argv) {
  log::set_stderr_enabled(false);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gamma0 reproduction", gamma0_reproduction},
      {"j0 reproduction", j0_reproduction},
      {"Bessel identity suite", identity_suite},
      {"exact renewal identity", renewal_identity},
      {"submultiplicativity and 2^s bound", inequalities},
      {"C4 self-consistency", c4_consistency},
      {"speed bound", speed_bound},
      {"conditional-law consistency", conditional_law},
      {"continuous ergodic check", ergodic},
      {"Ray-Knight check", ray_knight},
      {"dominance suite", dominance},
      {"Feller martingale/extinction controls", feller_controls},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && selected.count(number) == 0) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    if (!outcome.pass) ++failed;
    std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", number, outcome.pass ? "PASS" : "FAIL", criteria[i].first,
                outcome.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failed;
}
