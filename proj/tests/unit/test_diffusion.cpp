// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bessel/bessel_numerics.hpp"
#include "common/error.hpp"
#include "diffusion/diffusion_sim.hpp"

using namespace blt;
using namespace blt::diffusion;

TEST_CASE("simulated paths have the grid length and stay nonnegative") {
  const auto b = simulate_besq(2, 0.3, 1.0, 1e-3, 1);
  CHECK(b.values.size() == 1001);
  CHECK(b.values.front() == 0.3);
  CHECK(b.kind == DiffusionKind::BESQ2);
  const auto f = simulate_besq(0, 1.0, 2.0, 1e-3, 2);
  CHECK(f.values.size() == 2001);
  bool absorbed = false;
  for (double v : f.values) {
    CHECK(v >= 0.0);
    if (absorbed) CHECK(v == 0.0);
    absorbed = absorbed || v == 0.0;
  }
  CHECK(simulate_besq(2, 0.3, 1.0, 1e-3, 1).values == b.values);
  CHECK_THROWS_AS(simulate_besq(1, 0.0, 1.0, 1e-3, 1), InvalidArgument);
  CHECK_THROWS_AS(simulate_besq(2, -1.0, 1.0, 1e-3, 1), InvalidArgument);
  CHECK_THROWS_AS(simulate_besq(2, 0.0, 1.0, 0.0, 1), InvalidArgument);
}

TEST_CASE("BESQ2 moments") {
  const auto rows = besq_moments(2, 0.0, {0.5, 1.0, 2.0}, 1e-3, 4000, 3);
  for (const auto& r : rows) {
    CHECK(std::abs(r.mean_z) < 3.0);
    CHECK(std::abs(r.variance_z) < 3.0);
  }
  const auto threaded = besq_moments(2, 0.0, {0.5, 1.0, 2.0}, 1e-3, 4000, 3, 3);
  CHECK(threaded[2].mean == rows[2].mean);
}

TEST_CASE("Feller mean is constant") {
  const auto rows = besq_moments(0, 1.0, {0.5, 1.0, 2.0}, 1e-4, 3000, 4);
  for (const auto& r : rows) CHECK(std::abs(r.mean_z) < 3.0);
}

TEST_CASE("Feller escape probabilities") {
  for (double delta : {0.2, 0.5}) {
    const auto res = feller_sup_below(1.0 - delta, 1.0, 1e-4, 3000, 5);
    CHECK(res.expected == doctest::Approx(delta));
    CHECK(std::abs(res.z) < 3.0);
    CHECK(res.unresolved == 0);
  }
  CHECK_THROWS_AS(feller_sup_below(1.5, 1.0, 1e-4, 10, 1), InvalidArgument);
}

TEST_CASE("Brownian exit probability") {
  const auto rep = bm_exit_probability(1.0, 2.0, 1e-4, 3000, 6);
  CHECK(rep.expected == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(rep.z) < 3.0);
}

TEST_CASE("disk diffusion stays inside and is reproducible") {
  DiskConfig cfg;
  cfg.T = 20.0;
  cfg.dt = 1e-3;
  cfg.seed = 8;
  const auto run = simulate_disk_conditioned(cfg);
  CHECK(run.path.values.size() == 2001);
  for (double v : run.path.values) CHECK((v >= 0.0 && v < 1.0));
  CHECK(run.min_distance_to_boundary > 0.0);
  CHECK(run.time_average > 0.1);
  CHECK(run.time_average < 0.35);
  CHECK(run.radius_samples.size() == 40);
  CHECK(simulate_disk_conditioned(cfg).time_average == run.time_average);
  cfg.r0 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("disk diffusion shrinks steps near the boundary") {
  DiskConfig cfg;
  cfg.T = 5.0;
  cfg.dt = 1e-3;
  cfg.r0 = 0.99;
  cfg.seed = 2;
  const auto run = simulate_disk_conditioned(cfg);
  CHECK(run.refined_steps > 0);
  CHECK(run.steps > 5000);
}

TEST_CASE("disk diffusion survives starts next to the boundary") {
  DiskConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  cfg.r0 = 1.0 - 1e-5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    const auto run = simulate_disk_conditioned(cfg);
    CHECK(run.floor_steps > 0);
    CHECK(run.min_distance_to_boundary > 1e-6);
    for (double v : run.path.values) CHECK(v < 1.0);
  }
}

TEST_CASE("disk ergodic average is near m0 on a short horizon") {
  DiskConfig cfg;
  cfg.T = 200.0;
  cfg.dt = 1e-3;
  cfg.seed = 9;
  const auto rep = sde_ergodic(cfg, 2);
  CHECK(rep.replica_averages.size() == 2);
  CHECK(std::abs(rep.mean - bessel::compute_m0().closed) < 0.02);
  CHECK(rep.density_samples == 800);
  CHECK(rep.density_pass);
}

TEST_CASE("Ray-Knight profile on a small run") {
  const auto rep = ray_knight_check(1.0, 1e-4, 0.1, 400, 10);
  CHECK(rep.max_occupation_rel_error < 1e-6);
  CHECK_FALSE(rep.besq_rows.empty());
  CHECK_FALSE(rep.feller_rows.empty());
  for (const auto& row : rep.besq_rows) {
    CHECK(row.x >= 0.2);
    CHECK(row.x <= 1.0);
    CHECK(row.mean_rel_error < 0.2);
    CHECK(row.binned_expected_variance < row.expected_variance);
  }
  for (const auto& row : rep.feller_rows) {
    CHECK(row.expected_zero_fraction >= 0.0);
    CHECK(std::abs(row.zero_fraction - row.expected_zero_fraction) < 0.1);
  }
  CHECK_THROWS_AS(ray_knight_check(0.5, 1e-4, 0.1, 10, 1), InvalidArgument);
}

TEST_CASE("local time grid bookkeeping") {
  LocalTimeGrid grid(-1.0, 0.5, 0.01, 4);
  grid.counts = {10, 0, 5, 1};
  CHECK(grid.occupation_total() == doctest::Approx(0.16));
  CHECK(grid.density(0) == doctest::Approx(0.2));
  CHECK(grid.centre(1) == doctest::Approx(-0.25));
}

TEST_CASE("dominance control cases") {
  const double inf = std::numeric_limits<double>::infinity();
  DominanceConfig cfg;
  cfg.f = [inf](double) { return inf; };
  cfg.g = [](double) { return 1.0; };
  cfg.num_accepted = 200;
  cfg.seed = 11;
  const auto free_vs_one = dominance_test(cfg);
  CHECK(free_vs_one.pass);
  CHECK(free_vs_one.mean_f > free_vs_one.mean_g);
  CHECK(free_vs_one.discrepancy >= 0.0);
  cfg.f = [](double) { return 1.0; };
  const auto same = dominance_test(cfg);
  CHECK(same.pass);
  // reversed roles must be rejected
  cfg.f = [](double) { return 1.0; };
  cfg.g = [inf](double) { return inf; };
  CHECK_THROWS_AS(dominance_test(cfg), InvalidArgument);
}

TEST_CASE("bounded local time rejection") {
  const auto r1 = reject_bm_bounded_localtime(1.0, 1e-3, 10 * std::sqrt(1e-3), 100, 12);
  CHECK(r1.num_accepted == 100);
  CHECK(r1.max_sup_local_time <= 1.0);
  CHECK(r1.mean_sup_local_time < 1.0);
  CHECK(r1.acceptance_rate > 0.0);
  CHECK_THROWS_AS(reject_bm_bounded_localtime(3.0, 1e-3, 0.0316, 100, 1, 500), TimeoutError);
}

TEST_CASE("Feller area tail") {
  const auto rep = feller_area_tail({0.0, 0.5, 1.0, 5.0, 50.0}, 1.0, 1000, 13, 1e-3, 200.0);
  CHECK(rep.tail[0].estimate == 1.0);
  CHECK(rep.monotone);
  CHECK(rep.tail.back().estimate < 0.1);
  for (const auto& t : rep.tail) CHECK((t.ci_low <= t.estimate && t.estimate <= t.ci_high));
}
