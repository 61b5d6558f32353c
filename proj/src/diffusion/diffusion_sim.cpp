// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "diffusion/diffusion_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "bessel/bessel_numerics.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/numeric.hpp"
#include "common/parallel.hpp"
#include "common/rng.hpp"

namespace blt::diffusion {

std::string to_string(DiffusionKind kind) {
  switch (kind) {
    case DiffusionKind::BESQ2: return "BESQ2";
    case DiffusionKind::FELLER: return "FELLER";
    case DiffusionKind::DISK_COND: return "DISK_COND";
    case DiffusionKind::BM1D: return "BM1D";
  }
  return "unknown";
}

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument(std::string(name) + " must be positive and finite");
}

std::size_t grid_steps(double T, double dt) {
  return static_cast<std::size_t>(std::floor(T / dt + 1e-9));
}

double sample_variance(const std::vector<double>& xs, double mean) {
  CompensatedSum<double> s;
  for (double x : xs) s += (x - mean) * (x - mean);
  return xs.size() > 1 ? s.value() / static_cast<double>(xs.size() - 1) : 0.0;
}

double sample_mean(const std::vector<double>& xs) {
  CompensatedSum<double> s;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

/// Standard error of the sample variance (fourth central moment based).
double variance_std_error(const std::vector<double>& xs, double mean, double variance) {
  CompensatedSum<double> s;
  for (double x : xs) {
    const double d = (x - mean) * (x - mean);
    s += d * d;
  }
  const double n = static_cast<double>(xs.size());
  const double m4 = s.value() / n;
  return std::sqrt(std::max(0.0, m4 - variance * variance) / n);
}

// One Feller Euler step with truncation at 0.
double feller_step(double z, double sqrt_dt, NormalSource& normal) {
  if (z <= 0.0) return 0.0;
  return std::max(0.0, z + 2.0 * std::sqrt(z) * sqrt_dt * normal());
}

/// Collects exactly `target` accepted samples from numbered batches, taking
/// batches in index order so the result does not depend on the thread count.
template <typename Sample, typename RunBatch>
std::vector<Sample> collect_in_order(std::size_t target, std::uint64_t batch_size, std::uint64_t max_attempts,
                                     unsigned threads, RunBatch run_batch, std::uint64_t& attempts,
                                     const std::string& what) {
  struct Batch {
    std::vector<std::uint64_t> at;
    std::vector<Sample> samples;
  };
  std::vector<Sample> out;
  attempts = 0;
  std::size_t next = 0;
  while (out.size() < target) {
    if (attempts >= max_attempts) {
      throw TimeoutError(what + ": acceptance collapsed, " + std::to_string(out.size()) + " accepted in " +
                             std::to_string(attempts) + " attempts",
                         out.size(), static_cast<std::size_t>(attempts));
    }
    std::vector<Batch> round(threads);
    parallel_for(threads, threads, [&](std::size_t i) { run_batch(next + i, round[i].at, round[i].samples); });
    next += threads;
    for (auto& batch : round) {
      for (std::size_t k = 0; k < batch.samples.size() && out.size() < target; ++k) {
        out.push_back(std::move(batch.samples[k]));
        if (out.size() == target) attempts += batch.at[k] + 1;
      }
      if (out.size() == target) break;
      attempts += batch_size;
      if (attempts >= max_attempts) break;
    }
  }
  return out;
}

}  // namespace

DiffusionPath simulate_besq(int dim, double y0, double T, double dt, std::uint64_t seed) {
  if (dim != 0 && dim != 2) throw InvalidArgument("simulate_besq supports dim 0 or 2");
  if (!(y0 >= 0.0)) throw InvalidArgument("y0 must be >= 0");
  require_positive(T, "T");
  require_positive(dt, "dt");
  if (dt > 1e-3 * T) log::warn("dt exceeds 1e-3 T; discretization bias may be visible");
  const std::size_t n = grid_steps(T, dt);
  Engine engine = make_engine(seed, 0);
  NormalSource normal(engine);
  const double sqrt_dt = std::sqrt(dt);
  DiffusionPath path;
  path.dt = dt;
  path.values.reserve(n + 1);
  path.values.push_back(y0);
  if (dim == 2) {
    path.kind = DiffusionKind::BESQ2;
    double x = std::sqrt(y0);
    double y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x += sqrt_dt * normal();
      y += sqrt_dt * normal();
      path.values.push_back(x * x + y * y);
    }
  } else {
    path.kind = DiffusionKind::FELLER;
    double z = y0;
    for (std::size_t i = 0; i < n; ++i) {
      z = feller_step(z, sqrt_dt, normal);
      path.values.push_back(z);
    }
  }
  return path;
}

std::vector<MomentRow> besq_moments(int dim, double y0, const std::vector<double>& times, double dt,
                                    std::size_t num_paths, std::uint64_t seed, int threads) {
  if (dim != 0 && dim != 2) throw InvalidArgument("besq_moments supports dim 0 or 2");
  if (times.empty() || num_paths < 2) throw InvalidArgument("besq_moments needs times and at least 2 paths");
  require_positive(dt, "dt");
  std::vector<std::size_t> idx;
  for (double t : times) {
    if (!(t >= 0.0)) throw InvalidArgument("times must be >= 0");
    idx.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  }
  const std::size_t last = *std::max_element(idx.begin(), idx.end());
  std::vector<std::vector<double>> values(times.size(), std::vector<double>(num_paths));
  parallel_for(num_paths, resolve_threads(threads), [&](std::size_t p) {
    Engine engine = make_engine(seed, p);
    NormalSource normal(engine);
    const double sqrt_dt = std::sqrt(dt);
    double x = std::sqrt(y0);
    double y = 0.0;
    double z = y0;
    for (std::size_t step = 0; step <= last; ++step) {
      const double current = dim == 2 ? x * x + y * y : z;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] == step) values[k][p] = current;
      }
      if (dim == 2) {
        x += sqrt_dt * normal();
        y += sqrt_dt * normal();
      } else {
        z = feller_step(z, sqrt_dt, normal);
      }
    }
  });
  std::vector<MomentRow> rows;
  const double n = static_cast<double>(num_paths);
  for (std::size_t k = 0; k < times.size(); ++k) {
    MomentRow row;
    row.t = static_cast<double>(idx[k]) * dt;
    row.mean = sample_mean(values[k]);
    row.variance = sample_variance(values[k], row.mean);
    row.mean_std_error = std::sqrt(row.variance / n);
    row.variance_std_error = variance_std_error(values[k], row.mean, row.variance);
    row.expected_mean = y0 + dim * row.t;
    row.expected_variance = 2.0 * dim * row.t * row.t + 4.0 * y0 * row.t;
    row.mean_z = row.mean_std_error > 0.0 ? (row.mean - row.expected_mean) / row.mean_std_error : 0.0;
    row.variance_z = row.variance_std_error > 0.0 ? (row.variance - row.expected_variance) / row.variance_std_error : 0.0;
    rows.push_back(row);
  }
  return rows;
}

SupBelowResult feller_sup_below(double y0, double level, double dt, std::size_t num_paths, std::uint64_t seed,
                                double T_max, int threads) {
  require_positive(level, "level");
  require_positive(dt, "dt");
  if (!(y0 > 0.0 && y0 < level)) throw InvalidArgument("feller_sup_below needs 0 < y0 < level");
  if (num_paths == 0) throw InvalidArgument("num_paths must be positive");
  // 0 = reached level, 1 = absorbed below, 2 = unresolved
  std::vector<std::uint8_t> outcome(num_paths, 2);
  const std::size_t max_steps = grid_steps(T_max, dt);
  parallel_for(num_paths, resolve_threads(threads), [&](std::size_t p) {
    Engine engine = make_engine(seed, p);
    NormalSource normal(engine);
    const double sqrt_dt = std::sqrt(dt);
    double z = y0;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const double next = feller_step(z, sqrt_dt, normal);
      if (next >= level) {
        outcome[p] = 0;
        return;
      }
      // bridge with the local variance 4 z dt
      const double cross = std::exp(-2.0 * (level - z) * (level - next) / (4.0 * z * dt));
      if (uniform01(engine) < cross) {
        outcome[p] = 0;
        return;
      }
      z = next;
      if (z == 0.0) {
        outcome[p] = 1;
        return;
      }
    }
  });
  SupBelowResult res;
  res.y0 = y0;
  res.level = level;
  res.num_paths = num_paths;
  for (auto o : outcome) {
    if (o == 1) ++res.stayed_below;
    if (o == 2) ++res.unresolved;
  }
  const double n = static_cast<double>(num_paths);
  res.estimate = static_cast<double>(res.stayed_below) / n;
  res.expected = 1.0 - y0 / level;
  res.std_error = std::sqrt(res.expected * (1.0 - res.expected) / n);
  res.z = (res.estimate - res.expected) / res.std_error;
  if (res.unresolved > 0) log::warn(std::to_string(res.unresolved) + " Feller paths neither hit the level nor 0 by T_max");
  return res;
}

// ---------------------------------------------------------------------------
// Disk-conditioned diffusion
// ---------------------------------------------------------------------------

void DiskConfig::validate() const {
  require_positive(T, "T");
  require_positive(dt, "dt");
  require_positive(record_every, "record_every");
  require_positive(sample_every, "sample_every");
  if (!(r0 >= 0.0 && r0 < 1.0)) throw InvalidArgument("r0 must lie in [0, 1)");
  if (!(shrink_radius > 0.0 && shrink_radius < 1.0)) throw InvalidArgument("shrink_radius must lie in (0, 1)");
  if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw InvalidArgument("shrink_factor must lie in (0, 1)");
  if (!(dt_min_ratio > 0.0 && dt_min_ratio <= 1.0)) throw InvalidArgument("dt_min_ratio must lie in (0, 1]");
}

namespace {

class DiskStepper {
 public:
  DiskStepper(const DiskConfig& cfg, Engine& engine, DiskRun& run)
      : cfg_(cfg), grad_(bessel::find_j0().j0), normal_(engine), run_(run),
        dt_min_(cfg.dt * cfg.dt_min_ratio),
        pieces_(static_cast<int>(std::llround(1.0 / cfg.shrink_factor))) {}

  void run() {
    double x = cfg_.r0;
    double y = 0.0;
    double t = 0.0;
    double next_record = 0.0;
    double next_sample = cfg_.sample_every;
    CompensatedSum<double> area;
    double max_r2 = x * x + y * y;
    const std::size_t base_steps = grid_steps(cfg_.T, cfg_.dt);
    const double sqrt_dt = std::sqrt(cfg_.dt);
    run_.path.kind = DiffusionKind::DISK_COND;
    run_.path.dt = cfg_.record_every;
    const auto on_leaf = [&](double x0, double y0, double x1, double y1, double h) {
      const double r0 = x0 * x0 + y0 * y0;
      const double r1 = x1 * x1 + y1 * y1;
      area += 0.5 * (r0 + r1) * h;
      t += h;
      ++run_.steps;
      max_r2 = std::max(max_r2, r1);
      while (t >= next_record - 1e-12 && next_record <= cfg_.T + 1e-12) {
        run_.path.values.push_back(r1);
        next_record += cfg_.record_every;
      }
      while (t >= next_sample - 1e-12) {
        run_.radius_samples.push_back(std::sqrt(r1));
        next_sample += cfg_.sample_every;
      }
    };
    run_.path.values.push_back(x * x + y * y);
    next_record = cfg_.record_every;
    for (std::size_t i = 0; i < base_steps; ++i) {
      const double dwx = sqrt_dt * normal_();
      const double dwy = sqrt_dt * normal_();
      advance(x, y, cfg_.dt, dwx, dwy, on_leaf);
    }
    run_.time_average = area.value() / t;
    run_.min_distance_to_boundary = 1.0 - std::sqrt(max_r2);
  }

 private:
  template <typename Leaf>
  void advance(double& x, double& y, double h, double dwx, double dwy, const Leaf& on_leaf) {
    const double r2 = x * x + y * y;
    const double g = grad_.over_r(r2);
    const double nx = x + g * x * h + dwx;
    const double ny = y + g * y * h + dwy;
    const double nr2 = nx * nx + ny * ny;
    const double R2 = cfg_.shrink_radius * cfg_.shrink_radius;
    const double sub = h * cfg_.shrink_factor;
    if ((r2 > R2 || nr2 > R2) && sub >= dt_min_) {
      const double r = std::sqrt(r2);
      const double move2 = (nx - x) * (nx - x) + (ny - y) * (ny - y);
      const double room = 0.5 * (1.0 - r);
      if (nr2 >= 1.0 || move2 > room * room) {
        ++run_.refined_steps;
        // split the noise along a Brownian bridge so the driving path is unchanged
        double rem_x = dwx;
        double rem_y = dwy;
        for (int k = 0; k < pieces_; ++k) {
          const double remaining = h - k * sub;
          double px = rem_x;
          double py = rem_y;
          if (k + 1 < pieces_) {
            const double sd = std::sqrt(sub * (remaining - sub) / remaining);
            px = rem_x * sub / remaining + sd * normal_();
            py = rem_y * sub / remaining + sd * normal_();
          }
          rem_x -= px;
          rem_y -= py;
          advance(x, y, sub, px, py, on_leaf);
        }
        return;
      }
    }
    if ((r2 > R2 || nr2 > R2) && sub < dt_min_) {
      floor_step(x, y, h, dwx, dwy, on_leaf);
      return;
    }
    const double nr = std::sqrt(nr2);
    if (nr >= 1.0 - 1e-6) {
      throw ConvergenceError("disk diffusion step collapse: radius " + std::to_string(nr) +
                             " reached at the minimum step " + std::to_string(h));
    }
    const double ox = x;
    const double oy = y;
    x = nx;
    y = ny;
    on_leaf(ox, oy, x, y, h);
  }

  // Steps at the floor near the boundary: the distance d = 1 - r moves as a
  // three-dimensional Bessel process (drift 1/d, the leading term of the
  // gradient), sampled exactly; the tangential part moves by its noise.
  template <typename Leaf>
  void floor_step(double& x, double& y, double h, double dwx, double dwy, const Leaf& on_leaf) {
    ++run_.floor_steps;
    const double r = std::sqrt(x * x + y * y);
    const double ux = x / r;
    const double uy = y / r;
    const double dw_r = dwx * ux + dwy * uy;
    const double dw_t = -dwx * uy + dwy * ux;
    const double e1 = normal_();
    const double e2 = normal_();
    const double a = (1.0 - r) - dw_r;
    const double d = std::sqrt(a * a + h * (e1 * e1 + e2 * e2));
    if (d <= 1e-6) {
      throw ConvergenceError("disk diffusion step collapse: distance " + std::to_string(d) +
                             " to the boundary at the minimum step " + std::to_string(h));
    }
    const double tx = x - uy * dw_t;
    const double ty = y + ux * dw_t;
    const double scale = (1.0 - d) / std::sqrt(tx * tx + ty * ty);
    const double ox = x;
    const double oy = y;
    x = tx * scale;
    y = ty * scale;
    on_leaf(ox, oy, x, y, h);
  }

  const DiskConfig& cfg_;
  bessel::RadialLogGradient grad_;
  NormalSource normal_;
  DiskRun& run_;
  double dt_min_;
  int pieces_;
};

}  // namespace

DiskRun simulate_disk_conditioned(const DiskConfig& config) {
  config.validate();
  Engine engine = make_engine(config.seed, 0);
  DiskRun run;
  DiskStepper stepper(config, engine, run);
  stepper.run();
  return run;
}

ErgodicReport sde_ergodic(const DiskConfig& config, std::size_t replicas, int threads, int density_bins) {
  config.validate();
  if (replicas == 0) throw InvalidArgument("replicas must be positive");
  if (density_bins < 2) throw InvalidArgument("density_bins must be >= 2");
  std::vector<DiskRun> runs(replicas);
  parallel_for(replicas, resolve_threads(threads), [&](std::size_t i) {
    DiskConfig cfg = config;
    cfg.seed = derive_seed(config.seed, i);
    if (i > 0) cfg.record_every = config.T;
    runs[i] = simulate_disk_conditioned(cfg);
  });
  ErgodicReport rep;
  rep.config = config;
  rep.replicas = replicas;
  RunningStats stats;
  rep.first_path = std::move(runs[0].path);
  for (const auto& r : runs) {
    rep.replica_averages.push_back(r.time_average);
    stats.add(r.time_average);
  }
  rep.mean = stats.mean();
  rep.std_error = stats.std_error();
  rep.m0 = bessel::compute_m0().closed;
  rep.abs_error = std::abs(rep.mean - rep.m0);
  rep.pass = rep.abs_error < rep.tolerance;

  const double j0 = bessel::find_j0().j0;
  const auto weight = [j0](double r) {
    const double j = bessel::bessel_j0(j0 * r);
    return r * j * j;
  };
  const double total = bessel::integrate(weight, 0.0, 1.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(density_bins), 0);
  for (const auto& r : runs) {
    for (double s : r.radius_samples) {
      const auto b = std::min(static_cast<std::size_t>(s * density_bins), counts.size() - 1);
      ++counts[b];
      ++rep.density_samples;
    }
  }
  rep.density_bins = density_bins;
  if (rep.density_samples > 0) {
    CompensatedSum<double> chi;
    for (int b = 0; b < density_bins; ++b) {
      const double p = bessel::integrate(weight, static_cast<double>(b) / density_bins,
                                         static_cast<double>(b + 1) / density_bins) /
                       total;
      const double expected = p * static_cast<double>(rep.density_samples);
      const double diff = static_cast<double>(counts[static_cast<std::size_t>(b)]) - expected;
      chi += diff * diff / expected;
    }
    rep.chi_square = chi.value();
    const boost::math::chi_squared dist(density_bins - 1);
    rep.chi_square_critical = boost::math::quantile(boost::math::complement(dist, 0.05));
    rep.density_pass = rep.chi_square <= rep.chi_square_critical;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ray-Knight
// ---------------------------------------------------------------------------

double LocalTimeGrid::occupation_total() const {
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < counts.size(); ++i) s += density(i) * h;
  return s.value();
}

namespace {

/// E[min(s, t)^2] for s, t independent uniform on [x1, x2].
double mean_min_squared(double x1, double x2) {
  const double h = x2 - x1;
  const auto antiderivative = [x2](double s) { return x2 * s * s * s / 3.0 - s * s * s * s / 4.0; };
  return 2.0 * (antiderivative(x2) - antiderivative(x1)) / (h * h);
}

}  // namespace

RayKnightReport ray_knight_check(double a, double dt, double h, std::size_t num_paths, std::uint64_t seed,
                                 double window_low, int threads) {
  if (!(a >= 1.0 && a <= 4.0)) throw InvalidArgument("ray_knight_check requires a in [1, 4]");
  require_positive(dt, "dt");
  require_positive(h, "h");
  if (!(window_low < 0.0)) throw InvalidArgument("window_low must be negative");
  if (num_paths < 2) throw InvalidArgument("num_paths must be >= 2");
  if (h < 3.0 * std::sqrt(dt)) log::warn("bin width h is below 3 sqrt(dt); binned local times will be noisy");

  // bins [a - (i + 1) h, a - i h), i = 0..nb-1, counted down from a
  const auto nb = static_cast<std::size_t>(std::ceil((a - window_low) / h));
  const double lo = a - static_cast<double>(nb) * h;
  const std::size_t chunk = 64;
  const std::size_t chunks = (num_paths + chunk - 1) / chunk;
  struct Partial {
    std::vector<RunningStats> stats;
    std::vector<std::size_t> zeros;
    double max_occupation_error = 0.0;
  };
  std::vector<Partial> partial(chunks);
  parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
    Partial& part = partial[c];
    part.stats.assign(nb, RunningStats{});
    part.zeros.assign(nb, 0);
    LocalTimeGrid grid(lo, h, dt, nb);
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t p = c * chunk; p < std::min(num_paths, (c + 1) * chunk); ++p) {
      Engine engine = make_engine(seed, p);
      NormalSource normal(engine);
      std::fill(grid.counts.begin(), grid.counts.end(), 0);
      double x = 0.0;
      std::uint64_t steps = 0;
      while (x < a) {
        const auto bin = std::min(static_cast<std::size_t>((x - lo) / h), nb - 1);
        ++grid.counts[bin];
        ++steps;
        x += sqrt_dt * normal();
        if (x < lo) x = lo;
      }
      const double elapsed = static_cast<double>(steps) * dt;
      part.max_occupation_error =
          std::max(part.max_occupation_error, std::abs(grid.occupation_total() - elapsed) / elapsed);
      for (std::size_t i = 0; i < nb; ++i) {
        // store by distance below a: bin i of the report is [a - (i+1) h, a - i h)
        const std::size_t from_top = nb - 1 - i;
        const double d = grid.density(i);
        part.stats[from_top].add(d);
        if (grid.counts[i] == 0) ++part.zeros[from_top];
      }
    }
  });
  std::vector<RunningStats> stats(nb);
  std::vector<std::size_t> zeros(nb, 0);
  RayKnightReport rep;
  for (const auto& part : partial) {
    for (std::size_t i = 0; i < nb; ++i) {
      stats[i].merge(part.stats[i]);
      zeros[i] += part.zeros[i];
    }
    rep.max_occupation_rel_error = std::max(rep.max_occupation_rel_error, part.max_occupation_error);
  }
  rep.a = a;
  rep.dt = dt;
  rep.h = h;
  rep.window_low = lo;
  rep.num_paths = num_paths;
  rep.seed = seed;
  for (std::size_t i = 0; i < nb; ++i) {
    const double x1 = static_cast<double>(i) * h;  // distance of the bin's top edge below a
    const double x2 = x1 + h;
    RayKnightRow row;
    row.x = 0.5 * (x1 + x2);
    row.level = a - row.x;
    row.mean = stats[i].mean();
    row.variance = stats[i].variance();
    row.zero_fraction = static_cast<double>(zeros[i]) / static_cast<double>(num_paths);
    if (row.x >= 0.2 * a && row.x <= a) {
      row.expected_mean = 2.0 * row.x;
      row.expected_variance = 4.0 * row.x * row.x;
      row.binned_expected_variance = 4.0 * mean_min_squared(x1, x2);
      row.mean_rel_error = std::abs(row.mean - row.expected_mean) / row.expected_mean;
      row.variance_rel_error = std::abs(row.variance - row.expected_variance) / row.expected_variance;
      rep.max_mean_rel_error = std::max(rep.max_mean_rel_error, row.mean_rel_error);
      rep.max_variance_rel_error = std::max(rep.max_variance_rel_error, row.variance_rel_error);
      rep.besq_rows.push_back(row);
    } else if (row.level < 0.0 && row.level >= lo + 0.1) {
      const double below = -row.level;  // distance below 0
      const double top = x1 - a;       // distance of the bin's top edge below 0
      row.x = below;
      row.expected_mean = 2.0 * a;
      row.expected_variance = 4.0 * a * a + 8.0 * a * below;
      row.binned_expected_variance = 4.0 * a * a + 8.0 * a * (below - h / 6.0);
      row.mean_rel_error = std::abs(row.mean - row.expected_mean) / row.expected_mean;
      row.variance_rel_error = std::abs(row.variance - row.expected_variance) / row.expected_variance;
      row.expected_zero_fraction = top / (top + a);
      rep.feller_rows.push_back(row);
    }
  }
  rep.pass = rep.max_mean_rel_error <= rep.mean_tolerance && rep.max_variance_rel_error <= rep.variance_tolerance &&
             rep.max_occupation_rel_error <= 1e-6;
  return rep;
}

// ---------------------------------------------------------------------------
// Dominance
// ---------------------------------------------------------------------------

namespace {

std::vector<double> conditioned_besq_marginals(const std::function<double(double)>& barrier, const DominanceConfig& cfg,
                                               std::uint64_t stream, std::uint64_t& attempts) {
  const std::size_t n = grid_steps(cfg.T, cfg.dt);
  const std::size_t probe = static_cast<std::size_t>(std::llround(0.5 * cfg.T / cfg.dt));
  std::vector<double> limit(n + 1);
  for (std::size_t k = 0; k <= n; ++k) limit[k] = barrier(static_cast<double>(k) * cfg.dt);
  if (cfg.y0 > limit[0]) throw InvalidArgument("y0 lies above the barrier at time 0");
  const std::uint64_t batch_size = 4096;
  const auto run_batch = [&](std::size_t index, std::vector<std::uint64_t>& at, std::vector<double>& samples) {
    Engine engine = make_engine(derive_seed(cfg.seed, stream), index);
    NormalSource normal(engine);
    const double sqrt_dt = std::sqrt(cfg.dt);
    for (std::uint64_t attempt = 0; attempt < batch_size; ++attempt) {
      double x = std::sqrt(cfg.y0);
      double y = 0.0;
      double probe_value = cfg.y0;
      bool ok = true;
      for (std::size_t k = 1; k <= n; ++k) {
        x += sqrt_dt * normal();
        y += sqrt_dt * normal();
        const double v = x * x + y * y;
        if (v > limit[k]) {
          ok = false;
          break;
        }
        if (k == probe) probe_value = v;
      }
      if (ok) {
        at.push_back(attempt);
        samples.push_back(probe_value);
      }
    }
  };
  return collect_in_order<double>(cfg.num_accepted, batch_size, cfg.max_attempts, resolve_threads(cfg.threads),
                                  run_batch, attempts, "dominance_test");
}

}  // namespace

DominanceReport dominance_test(const DominanceConfig& config) {
  if (!config.f || !config.g) throw InvalidArgument("dominance_test needs both barriers");
  require_positive(config.T, "T");
  require_positive(config.dt, "dt");
  if (!(config.y0 >= 0.0)) throw InvalidArgument("y0 must be >= 0");
  if (config.num_accepted < 2) throw InvalidArgument("num_accepted must be >= 2");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  for (std::size_t k = 0; k <= grid_steps(config.T, config.dt); ++k) {
    const double t = static_cast<double>(k) * config.dt;
    if (config.g(t) > config.f(t)) throw InvalidArgument("dominance_test requires g <= f on [0, T]");
  }
  DominanceReport rep;
  rep.f_label = config.f_label;
  rep.g_label = config.g_label;
  rep.T = config.T;
  rep.y0 = config.y0;
  rep.alpha = config.alpha;
  rep.probe_time = static_cast<double>(std::llround(0.5 * config.T / config.dt)) * config.dt;
  std::vector<double> yf = conditioned_besq_marginals(config.f, config, 1, rep.attempts_f);
  std::vector<double> yg = conditioned_besq_marginals(config.g, config, 2, rep.attempts_g);
  rep.n_f = yf.size();
  rep.n_g = yg.size();
  rep.mean_f = sample_mean(yf);
  rep.mean_g = sample_mean(yg);
  std::sort(yf.begin(), yf.end());
  std::sort(yg.begin(), yg.end());
  // sup_y F_f(y) - F_g(y), evaluated just after each jump of F_f
  double d = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < yf.size(); ++i) {
    while (j < yg.size() && yg[j] <= yf[i]) ++j;
    const double ff = static_cast<double>(i + 1) / static_cast<double>(yf.size());
    const double fg = static_cast<double>(j) / static_cast<double>(yg.size());
    d = std::max(d, ff - fg);
  }
  rep.discrepancy = d;
  const double n = static_cast<double>(rep.n_f);
  const double m = static_cast<double>(rep.n_g);
  rep.critical_value = std::sqrt(-std::log(config.alpha) / 2.0) * std::sqrt((n + m) / (n * m));
  rep.pass = rep.discrepancy <= rep.critical_value;
  return rep;
}

// ---------------------------------------------------------------------------
// Bounded local time
// ---------------------------------------------------------------------------

BoundedLocalTimeResult reject_bm_bounded_localtime(double a, double dt, double h, std::size_t num_accepted,
                                                   std::uint64_t seed, std::uint64_t max_attempts, int threads) {
  require_positive(a, "a");
  require_positive(dt, "dt");
  require_positive(h, "h");
  if (a > 3.0) log::warn("a > 3: acceptance may be too small to be feasible");
  if (num_accepted == 0) throw InvalidArgument("num_accepted must be positive");
  struct Accepted {
    double tau;
    double sup_density;
  };
  const std::uint64_t batch_size = 1024;
  const auto limit = static_cast<std::uint64_t>(std::floor(h / dt + 1e-9));  // counts allowed per bin
  const auto run_batch = [&](std::size_t index, std::vector<std::uint64_t>& at, std::vector<Accepted>& samples) {
    Engine engine = make_engine(seed, index);
    NormalSource normal(engine);
    const double sqrt_dt = std::sqrt(dt);
    const auto top = static_cast<std::int64_t>(std::floor(a / h)) + 1;
    std::vector<std::uint64_t> counts;
    for (std::uint64_t attempt = 0; attempt < batch_size; ++attempt) {
      // bin b covers [b h, (b + 1) h); stored at offset top - b
      counts.assign(static_cast<std::size_t>(top) + 64, 0);
      double x = 0.0;
      std::uint64_t steps = 0;
      std::uint64_t max_count = 0;
      bool ok = true;
      while (x < a) {
        const auto b = static_cast<std::int64_t>(std::floor(x / h));
        const auto slot = static_cast<std::size_t>(top - b);
        if (slot >= counts.size()) counts.resize(slot + 64, 0);
        const std::uint64_t c = ++counts[slot];
        max_count = std::max(max_count, c);
        if (c > limit) {
          ok = false;
          break;
        }
        ++steps;
        x += sqrt_dt * normal();
      }
      if (ok) {
        at.push_back(attempt);
        samples.push_back({static_cast<double>(steps) * dt, static_cast<double>(max_count) * dt / h});
      }
    }
  };
  std::uint64_t attempts = 0;
  const auto accepted = collect_in_order<Accepted>(num_accepted, batch_size, max_attempts, resolve_threads(threads),
                                                   run_batch, attempts, "reject_bm_bounded_localtime");
  BoundedLocalTimeResult res;
  res.a = a;
  res.dt = dt;
  res.h = h;
  res.num_accepted = accepted.size();
  res.attempts = attempts;
  res.acceptance_rate = static_cast<double>(accepted.size()) / static_cast<double>(attempts);
  RunningStats tau;
  RunningStats sup;
  for (const auto& s : accepted) {
    tau.add(s.tau / a);
    sup.add(s.sup_density);
    res.max_sup_local_time = std::max(res.max_sup_local_time, s.sup_density);
    res.tau_samples.push_back(s.tau);
  }
  res.mean_tau_over_a = tau.mean();
  res.tau_over_a_std_error = tau.std_error();
  res.mean_sup_local_time = sup.mean();
  res.sup_local_time_std_error = sup.std_error();
  return res;
}

// ---------------------------------------------------------------------------
// Feller area, exit probabilities
// ---------------------------------------------------------------------------

FellerAreaReport feller_area_tail(const std::vector<double>& z_grid, double y0, std::size_t num_paths,
                                  std::uint64_t seed, double dt, double T_max, int threads) {
  require_positive(y0, "y0");
  require_positive(dt, "dt");
  require_positive(T_max, "T_max");
  if (num_paths == 0) throw InvalidArgument("num_paths must be positive");
  std::vector<double> area(num_paths, 0.0);
  std::vector<std::uint8_t> absorbed(num_paths, 0);
  const std::size_t max_steps = grid_steps(T_max, dt);
  parallel_for(num_paths, resolve_threads(threads), [&](std::size_t p) {
    Engine engine = make_engine(seed, p);
    NormalSource normal(engine);
    const double sqrt_dt = std::sqrt(dt);
    double z = y0;
    CompensatedSum<double> sum;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const double next = feller_step(z, sqrt_dt, normal);
      sum += 0.5 * (z + next) * dt;
      z = next;
      if (z == 0.0) {
        absorbed[p] = 1;
        break;
      }
    }
    area[p] = sum.value();
  });
  FellerAreaReport rep;
  rep.y0 = y0;
  rep.dt = dt;
  rep.T_max = T_max;
  rep.num_paths = num_paths;
  for (auto a : absorbed) rep.absorbed += a;
  rep.absorbed_fraction = static_cast<double>(rep.absorbed) / static_cast<double>(num_paths);
  if (rep.absorbed_fraction < 0.999) {
    log::warn("only " + std::to_string(rep.absorbed_fraction * 100.0) + "% of Feller paths were absorbed by T_max");
  }
  std::vector<double> sorted = area;
  std::sort(sorted.begin(), sorted.end());
  for (double z : z_grid) {
    const auto above = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), z));
    const auto [lo, hi] = wilson_interval(above, num_paths, kZ95);
    rep.tail.push_back({z, static_cast<double>(above) / static_cast<double>(num_paths), lo, hi});
  }
  for (std::size_t i = 1; i < rep.tail.size(); ++i) {
    if (rep.tail[i].z >= rep.tail[i - 1].z && rep.tail[i].estimate > rep.tail[i - 1].estimate) rep.monotone = false;
  }
  return rep;
}

ExitReport bm_exit_probability(double a, double b, double dt, std::size_t num_paths, std::uint64_t seed, int threads) {
  require_positive(a, "a");
  require_positive(b, "b");
  require_positive(dt, "dt");
  if (num_paths == 0) throw InvalidArgument("num_paths must be positive");
  std::vector<std::uint8_t> hit(num_paths, 0);
  parallel_for(num_paths, resolve_threads(threads), [&](std::size_t p) {
    Engine engine = make_engine(seed, p);
    NormalSource normal(engine);
    const double sqrt_dt = std::sqrt(dt);
    double x = 0.0;
    while (x < a && x > -b) x += sqrt_dt * normal();
    hit[p] = x >= a ? 1 : 0;
  });
  ExitReport rep;
  rep.a = a;
  rep.b = b;
  rep.num_paths = num_paths;
  for (auto v : hit) rep.hit_a += v;
  const double n = static_cast<double>(num_paths);
  rep.estimate = static_cast<double>(rep.hit_a) / n;
  rep.expected = b / (a + b);
  rep.std_error = std::sqrt(rep.expected * (1.0 - rep.expected) / n);
  rep.z = (rep.estimate - rep.expected) / rep.std_error;
  return rep;
}

}  // namespace blt::diffusion
