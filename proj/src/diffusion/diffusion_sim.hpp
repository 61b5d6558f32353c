// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo for squared Bessel and Feller diffusions, planar Brownian
// motion conditioned to stay in the unit disk, Ray-Knight local-time
// profiles, and rejection-conditioned samples. Every routine is a pure
// function of its arguments and seed; path i always uses stream i.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace blt::diffusion {

enum class DiffusionKind { BESQ2, FELLER, DISK_COND, BM1D };

std::string to_string(DiffusionKind kind);

struct DiffusionPath {
  DiffusionKind kind = DiffusionKind::BESQ2;
  double dt = 0.0;  ///< spacing of `values`
  std::vector<double> values;
};

/// dim = 2: |W_t|^2 for a planar Brownian motion started at (sqrt(y0), 0).
/// dim = 0: Euler for dZ = 2 sqrt(Z) dB truncated at 0 and absorbed there.
/// Returns floor(T / dt) + 1 values.
DiffusionPath simulate_besq(int dim, double y0, double T, double dt, std::uint64_t seed);

struct MomentRow {
  double t = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_std_error = 0.0;
  double variance_std_error = 0.0;
  double expected_mean = 0.0;
  double expected_variance = 0.0;
  double mean_z = 0.0;      ///< (mean - expected) / std error
  double variance_z = 0.0;  ///< same for the variance
};

/// Sample moments of BESQ_dim(y0) at `times` over num_paths paths, against
/// E = y0 + dim t and Var = 2 dim t^2 + 4 y0 t.
std::vector<MomentRow> besq_moments(int dim, double y0, const std::vector<double>& times, double dt,
                                    std::size_t num_paths, std::uint64_t seed, int threads = 1);

struct SupBelowResult {
  double y0 = 0.0;
  double level = 1.0;
  std::size_t num_paths = 0;
  std::size_t stayed_below = 0;  ///< absorbed at 0 before reaching the level
  std::size_t unresolved = 0;    ///< neither event before T_max
  double estimate = 0.0;
  double std_error = 0.0;
  double expected = 0.0;  ///< 1 - y0 / level
  double z = 0.0;
};

/// P(sup_t Z_t < level) for the Feller diffusion from y0, with a Brownian
/// bridge test for crossings between grid points.
SupBelowResult feller_sup_below(double y0, double level, double dt, std::size_t num_paths, std::uint64_t seed,
                                double T_max = 1e3, int threads = 1);

// ---------------------------------------------------------------------------
// Disk-conditioned diffusion
// ---------------------------------------------------------------------------

struct DiskConfig {
  double T = 10.0;
  double dt = 1e-4;
  double r0 = 0.5;
  double shrink_radius = 0.95;
  double shrink_factor = 0.25;
  double dt_min_ratio = 1e-4;
  double record_every = 0.01;  ///< spacing of the recorded |Z|^2 values
  double sample_every = 0.5;   ///< spacing of the radius samples kept for density tests
  std::uint64_t seed = 0;

  void validate() const;
};

struct DiskRun {
  DiffusionPath path;              ///< |Z|^2 every record_every
  double time_average = 0.0;       ///< (1/T) int_0^T |Z_t|^2 dt
  std::vector<double> radius_samples;
  std::uint64_t steps = 0;
  std::uint64_t refined_steps = 0;
  std::uint64_t floor_steps = 0;  ///< steps at the floor taken by the boundary scheme
  double min_distance_to_boundary = 1.0;
};

/// Euler for dZ = grad log phi(Z) dt + dW in the unit disk, phi(x) =
/// J0(j0 |x|). A step that starts or lands beyond shrink_radius is split into
/// shrink_factor pieces along a Brownian bridge consistent with its noise,
/// down to dt * dt_min_ratio. Near the boundary, steps at that floor move the
/// distance to the boundary as an exact three-dimensional Bessel step. Throws
/// ConvergenceError when a step lands within 1e-6 of the boundary.
DiskRun simulate_disk_conditioned(const DiskConfig& config);

struct ErgodicReport {
  DiskConfig config;
  std::size_t replicas = 0;
  std::vector<double> replica_averages;
  double mean = 0.0;
  double std_error = 0.0;
  double m0 = 0.0;
  double abs_error = 0.0;
  double tolerance = 0.01;
  bool pass = false;
  // chi-square test of pooled radius samples against 2 pi r phi(r)^2 / C
  std::size_t density_samples = 0;
  int density_bins = 0;
  double chi_square = 0.0;
  double chi_square_critical = 0.0;
  bool density_pass = false;
  DiffusionPath first_path;  ///< |Z|^2 of replica 0 every record_every
};

/// Runs `replicas` independent disk diffusions (replica i uses stream i of
/// config.seed) and compares the pooled time average of |Z|^2 with m0.
ErgodicReport sde_ergodic(const DiskConfig& config, std::size_t replicas, int threads = 1, int density_bins = 20);

// ---------------------------------------------------------------------------
// Local times
// ---------------------------------------------------------------------------

/// Occupation counts of a time-discretized path in bins [lo + i h, lo + (i+1) h).
struct LocalTimeGrid {
  double lo = 0.0;
  double h = 0.0;
  double dt = 0.0;
  std::vector<std::uint64_t> counts;

  LocalTimeGrid(double lo, double h, double dt, std::size_t bins) : lo(lo), h(h), dt(dt), counts(bins, 0) {}
  double density(std::size_t i) const { return static_cast<double>(counts[i]) * dt / h; }
  double centre(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * h; }
  /// sum of density * h
  double occupation_total() const;
};

struct RayKnightRow {
  double x = 0.0;      ///< distance below a (BESQ2 part) or below 0 (Feller part)
  double level = 0.0;  ///< bin centre
  double mean = 0.0;
  double variance = 0.0;
  double expected_mean = 0.0;
  double expected_variance = 0.0;
  double binned_expected_variance = 0.0;  ///< variance of the bin average under the limit law
  double mean_rel_error = 0.0;
  double variance_rel_error = 0.0;
  double zero_fraction = 0.0;           ///< Feller part: fraction with no local time
  double expected_zero_fraction = 0.0;  ///< x / (x + a)
};

struct RayKnightReport {
  double a = 0.0;
  double dt = 0.0;
  double h = 0.0;
  double window_low = 0.0;
  std::size_t num_paths = 0;
  std::uint64_t seed = 0;
  std::vector<RayKnightRow> besq_rows;    ///< x in [0.2 a, a]
  std::vector<RayKnightRow> feller_rows;  ///< levels in [window_low + 0.1, 0)
  double max_mean_rel_error = 0.0;
  double max_variance_rel_error = 0.0;
  double max_occupation_rel_error = 0.0;  ///< per path |sum density h - time in window| / time
  double mean_tolerance = 0.05;
  double variance_tolerance = 0.10;
  bool pass = false;
};

/// Brownian motion from 0 run to tau_a. Only the window [window_low, a] is
/// simulated: an excursion below window_low is skipped by restarting at
/// window_low, which leaves every local time above window_low unchanged in law.
RayKnightReport ray_knight_check(double a, double dt, double h, std::size_t num_paths, std::uint64_t seed,
                                 double window_low = -0.5, int threads = 1);

// ---------------------------------------------------------------------------
// Dominance of conditioned BESQ2 marginals
// ---------------------------------------------------------------------------

struct DominanceConfig {
  std::function<double(double)> f;  ///< upper barrier (may return +inf)
  std::function<double(double)> g;  ///< lower barrier, g <= f
  std::string f_label = "f";
  std::string g_label = "g";
  double T = 2.0;
  double y0 = 0.1;
  double dt = 0.01;
  std::size_t num_accepted = 300;
  double alpha = 0.01;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 500'000'000;
  int threads = 1;
};

struct DominanceReport {
  std::string f_label;
  std::string g_label;
  double T = 0.0;
  double y0 = 0.0;
  double probe_time = 0.0;
  std::size_t n_f = 0;
  std::size_t n_g = 0;
  std::uint64_t attempts_f = 0;
  std::uint64_t attempts_g = 0;
  double discrepancy = 0.0;  ///< sup_y (F_f(y) - F_g(y))^+
  double critical_value = 0.0;
  double alpha = 0.01;
  bool pass = false;  ///< dominance not rejected
  double mean_f = 0.0;
  double mean_g = 0.0;
};

/// Samples BESQ2(y0) paths conditioned (by rejection on the dt grid) to stay
/// below f, resp. g, on [0, T] and tests that Y^g at T/2 is stochastically
/// smaller than Y^f with a one-sided two-sample Kolmogorov-Smirnov test.
DominanceReport dominance_test(const DominanceConfig& config);

// ---------------------------------------------------------------------------
// Brownian motion with bounded local time
// ---------------------------------------------------------------------------

struct BoundedLocalTimeResult {
  double a = 0.0;
  double dt = 0.0;
  double h = 0.0;
  std::size_t num_accepted = 0;
  std::uint64_t attempts = 0;
  double acceptance_rate = 0.0;
  double mean_tau_over_a = 0.0;
  double tau_over_a_std_error = 0.0;
  double mean_sup_local_time = 0.0;
  double sup_local_time_std_error = 0.0;
  double max_sup_local_time = 0.0;
  std::vector<double> tau_samples;
};

/// Brownian motion run to tau_a and rejected as soon as a binned local time
/// exceeds 1. Throws TimeoutError after max_attempts.
BoundedLocalTimeResult reject_bm_bounded_localtime(double a, double dt, double h, std::size_t num_accepted,
                                                   std::uint64_t seed, std::uint64_t max_attempts = 200'000'000,
                                                   int threads = 1);

// ---------------------------------------------------------------------------
// Feller area and exit probabilities
// ---------------------------------------------------------------------------

struct TailPoint {
  double z = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct FellerAreaReport {
  double y0 = 1.0;
  double dt = 0.0;
  double T_max = 0.0;
  std::size_t num_paths = 0;
  std::size_t absorbed = 0;
  double absorbed_fraction = 0.0;
  std::vector<TailPoint> tail;
  bool monotone = true;
};

/// Empirical P(int_0^inf Z_s ds > z) with 95% Wilson intervals. Warns when
/// fewer than 99.9% of paths are absorbed by T_max.
FellerAreaReport feller_area_tail(const std::vector<double>& z_grid, double y0, std::size_t num_paths,
                                  std::uint64_t seed, double dt = 1e-3, double T_max = 1e3, int threads = 1);

struct ExitReport {
  double a = 0.0;
  double b = 0.0;
  std::size_t num_paths = 0;
  std::size_t hit_a = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double expected = 0.0;  ///< b / (a + b)
  double z = 0.0;
};

/// P(Brownian motion hits a before -b) on the dt grid.
ExitReport bm_exit_probability(double a, double b, double dt, std::size_t num_paths, std::uint64_t seed,
                               int threads = 1);

}  // namespace blt::diffusion
