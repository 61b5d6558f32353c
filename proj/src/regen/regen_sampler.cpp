// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "regen/regen_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "common/numeric.hpp"
#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "enumeration/exact_enum.hpp"

namespace blt::regen {

std::string to_string(ExcursionClass cls) { return cls == ExcursionClass::M ? "M" : "M_tilde"; }

ExcursionClass excursion_class_from_string(const std::string& name) {
  if (name == "M") return ExcursionClass::M;
  if (name == "M_tilde" || name == "M~") return ExcursionClass::M_tilde;
  throw InvalidArgument("unknown excursion class '" + name + "' (expected M or M_tilde)");
}

std::size_t ExcursionTable::pick(double u) const {
  const double target = u * Z_trunc;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), entries.size() - 1);
}

double ExcursionTable::exact_speed() const {
  CompensatedSum<double> heights;
  CompensatedSum<double> lengths;
  for (const auto& e : entries) {
    heights += e.weight * e.height;
    lengths += e.weight * static_cast<double>(e.path.length());
  }
  return heights.value() / lengths.value();
}

ExcursionTable build_excursion_table(int L0, double c4, int m_max, ExcursionClass cls, std::uint64_t node_budget) {
  if (!(c4 > 0.0 && c4 <= std::numbers::ln2)) throw InvalidArgument("c4 must lie in (0, log 2]");
  if (m_max < 1) throw InvalidArgument("m_max must be >= 1");
  ExcursionTable table;
  table.L0 = L0;
  table.c4 = c4;
  table.m_max = m_max;
  table.cls = cls;
  const auto paths = enumeration::enumerate_excursions(L0, m_max, cls == ExcursionClass::M_tilde, node_budget);
  table.entries.reserve(paths.size());
  CompensatedSum<double> z;
  CompensatedSum<double> band;
  for (const auto& p : paths) {
    const int h = p.end_position();
    const double w = std::exp(c4 * h - std::numbers::ln2 * static_cast<double>(p.length()));
    z += w;
    table.cumulative.push_back(z.value());
    if (static_cast<int>(p.length()) >= m_max - 1) band += w;
    table.entries.push_back({p, h, w});
  }
  if (table.entries.empty()) throw InvalidArgument("excursion table is empty");
  table.Z_trunc = z.value();
  table.truncated_mass_fraction = band.value() / table.Z_trunc;
  return table;
}

LatticePath RegenPath::path() const {
  LatticePath out;
  for (const auto& e : excursions) out = out.concatenated(e);
  return out;
}

RegenPath sample_regen_path(const ExcursionTable& table_first, const ExcursionTable& table,
                            std::size_t num_excursions, std::uint64_t seed) {
  if (table_first.entries.empty() || table.entries.empty()) throw InvalidArgument("excursion tables must be nonempty");
  if (table_first.L0 != table.L0 || table_first.c4 != table.c4) {
    throw InvalidArgument("excursion tables must share L0 and c4");
  }
  Engine engine = make_engine(seed, 0);
  RegenPath out;
  int level = 0;
  std::size_t time = 0;
  for (std::size_t j = 0; j < num_excursions; ++j) {
    const ExcursionTable& source = j == 0 ? table_first : table;
    const ExcursionEntry& e = source.entries[source.pick(uniform01(engine))];
    level += e.height;
    time += e.path.length();
    out.excursions.push_back(e.path);
    out.nu.push_back(level);
    out.sigma.push_back(time);
  }
  return out;
}

namespace {

struct SpeedPartial {
  double sum_h = 0.0;
  double sum_m = 0.0;
  double sum_hh = 0.0;
  double sum_mm = 0.0;
  double sum_hm = 0.0;
  std::size_t n = 0;
  // least squares of nu_j on sigma_j within the replica
  double slope = 0.0;
};

double least_squares_slope(const std::vector<int>& nu, const std::vector<std::size_t>& sigma, std::size_t first) {
  RunningStats xs;
  RunningStats ys;
  for (std::size_t j = first; j < nu.size(); ++j) {
    xs.add(static_cast<double>(sigma[j]));
    ys.add(nu[j]);
  }
  CompensatedSum<double> sxy;
  CompensatedSum<double> sxx;
  for (std::size_t j = first; j < nu.size(); ++j) {
    const double dx = static_cast<double>(sigma[j]) - xs.mean();
    sxy += dx * (nu[j] - ys.mean());
    sxx += dx * dx;
  }
  return sxx.value() > 0.0 ? sxy.value() / sxx.value() : 1.0;
}

}  // namespace

SpeedEstimate estimate_speed(const ExcursionTable& table_first, const ExcursionTable& table,
                             std::size_t num_excursions, std::size_t num_replicas, std::uint64_t seed, int threads) {
  if (num_excursions == 0) throw InvalidArgument("num_excursions must be positive");
  if (num_replicas == 0 || num_replicas > num_excursions) throw InvalidArgument("num_replicas must be in [1, num_excursions]");
  std::vector<SpeedPartial> partial(num_replicas);
  parallel_for(num_replicas, resolve_threads(threads), [&](std::size_t i) {
    const std::size_t count = num_excursions / num_replicas + (i < num_excursions % num_replicas ? 1 : 0);
    const RegenPath path = sample_regen_path(table_first, table, count + 1, derive_seed(seed, i));
    SpeedPartial& p = partial[i];
    for (std::size_t j = 1; j < path.excursions.size(); ++j) {
      const double h = path.nu[j] - path.nu[j - 1];
      const double m = static_cast<double>(path.sigma[j] - path.sigma[j - 1]);
      p.sum_h += h;
      p.sum_m += m;
      p.sum_hh += h * h;
      p.sum_mm += m * m;
      p.sum_hm += h * m;
      ++p.n;
    }
    p.slope = least_squares_slope(path.nu, path.sigma, 1);
  });

  SpeedEstimate est;
  est.L0 = table.L0;
  est.c4 = table.c4;
  est.m_max = table.m_max;
  est.num_excursions = num_excursions;
  est.num_replicas = num_replicas;
  est.seed = seed;
  est.table_speed = table.exact_speed();
  est.truncated_mass_fraction = table.truncated_mass_fraction;

  CompensatedSum<double> sh, sm, shh, smm, shm, slope;
  std::size_t n = 0;
  for (const auto& p : partial) {
    sh += p.sum_h;
    sm += p.sum_m;
    shh += p.sum_hh;
    smm += p.sum_mm;
    shm += p.sum_hm;
    n += p.n;
    est.replica_gamma.push_back(p.sum_h / p.sum_m);
    slope += p.slope;
  }
  const double N = static_cast<double>(n);
  const double mh = sh.value() / N;
  const double mm = sm.value() / N;
  const double gamma = mh / mm;
  est.gamma_hat = gamma;
  est.regression_slope = slope.value() / static_cast<double>(num_replicas);
  if (n > 1) {
    const double var_h = (shh.value() - N * mh * mh) / (N - 1.0);
    const double var_m = (smm.value() - N * mm * mm) / (N - 1.0);
    const double cov = (shm.value() - N * mh * mm) / (N - 1.0);
    const double var_ratio = std::max(0.0, var_h - 2.0 * gamma * cov + gamma * gamma * var_m) / (N * mm * mm);
    const double half = kZ99 * std::sqrt(var_ratio);
    est.ci_low = gamma - half;
    est.ci_high = gamma + half;
  } else {
    est.ci_low = est.ci_high = gamma;
  }
  return est;
}

SpeedEstimate estimate_speed(int L0, double c4, int m_max, std::size_t num_excursions, std::size_t num_replicas,
                             std::uint64_t seed, int threads) {
  const auto first = build_excursion_table(L0, c4, m_max, ExcursionClass::M_tilde);
  const auto table = build_excursion_table(L0, c4, m_max, ExcursionClass::M);
  return estimate_speed(first, table, num_excursions, num_replicas, seed, threads);
}

// ---------------------------------------------------------------------------
// Rejection sampling of P(. | B_r)
// ---------------------------------------------------------------------------

void RejectionConfig::validate() const {
  lattice::EventParams{L0, r}.validate();
  if (r < 1) throw InvalidArgument("r must be >= 1");
  if (num_accepted == 0) throw InvalidArgument("num_accepted must be positive");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (max_attempts == 0) throw InvalidArgument("max_attempts must be positive");
}

double RejectionResult::acceptance_std_error() const {
  if (attempts == 0) return 0.0;
  const double p = acceptance_rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(attempts));
}

namespace {

struct Batch {
  std::vector<std::uint32_t> accepted_at;  // attempt index within the batch
  std::vector<LatticePath> paths;
  std::vector<bool> plus_first;
};

class ConstrainedWalker {
 public:
  ConstrainedWalker(int L0, int r) : L0_(L0), base_(64), counts_(static_cast<std::size_t>(r + 64), 0) {}

  /// One attempt; true iff tau_r arrives before any local time exceeds L0.
  bool attempt(int r, CoinSource& coin, std::vector<lattice::Step>* steps) {
    std::fill(counts_.begin() + (low_ + base_), counts_.end(), 0);
    low_ = 0;
    if (steps != nullptr) steps->clear();
    int pos = 0;
    for (;;) {
      const int step = coin();
      pos += step;
      if (steps != nullptr) steps->push_back(static_cast<lattice::Step>(step));
      if (pos == r) return true;
      if (pos + base_ < 0) grow();
      low_ = std::min(low_, pos);
      if (++counts_[static_cast<std::size_t>(pos + base_)] > L0_) return false;
    }
  }

 private:
  void grow() {
    const int extra = base_;
    counts_.insert(counts_.begin(), static_cast<std::size_t>(extra), 0);
    base_ += extra;
  }

  int L0_;
  int base_;
  int low_ = 0;
  std::vector<int> counts_;
};

Batch run_batch(const RejectionConfig& cfg, std::size_t index) {
  Batch batch;
  Engine engine = make_engine(cfg.seed, index);
  CoinSource coin(engine);
  ConstrainedWalker walker(cfg.L0, cfg.r);
  std::vector<lattice::Step> steps;
  for (std::size_t a = 0; a < cfg.batch_size; ++a) {
    if (walker.attempt(cfg.r, coin, &steps)) {
      batch.accepted_at.push_back(static_cast<std::uint32_t>(a));
      batch.plus_first.push_back(steps.front() == 1);
      if (cfg.keep_paths) batch.paths.emplace_back(steps);
    }
  }
  return batch;
}

}  // namespace

RejectionResult rejection_conditional(const RejectionConfig& config) {
  config.validate();
  RejectionResult result;
  result.config = config;
  const unsigned threads = resolve_threads(config.threads);
  std::size_t next_batch = 0;
  while (result.num_accepted < config.num_accepted) {
    if (result.attempts >= config.max_attempts) {
      throw TimeoutError("rejection sampler for r = " + std::to_string(config.r) + " exhausted " +
                             std::to_string(config.max_attempts) + " attempts with " +
                             std::to_string(result.num_accepted) + " accepted",
                         result.num_accepted, static_cast<std::size_t>(result.attempts));
    }
    std::vector<Batch> round(threads);
    parallel_for(threads, threads, [&](std::size_t i) { round[i] = run_batch(config, next_batch + i); });
    next_batch += threads;
    for (auto& batch : round) {
      for (std::size_t k = 0; k < batch.accepted_at.size(); ++k) {
        if (result.num_accepted == config.num_accepted) break;
        ++result.num_accepted;
        if (batch.plus_first[k]) ++result.plus_first;
        if (config.keep_paths) result.accepted.push_back(std::move(batch.paths[k]));
        if (result.num_accepted == config.num_accepted) {
          result.attempts += batch.accepted_at[k] + 1;
        }
      }
      if (result.num_accepted == config.num_accepted) break;
      result.attempts += config.batch_size;
      if (result.attempts >= config.max_attempts) break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cylinders
// ---------------------------------------------------------------------------

namespace {

bool starts_with(std::span<const lattice::Step> path, std::span<const lattice::Step> prefix) {
  return path.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

double cylinder_mass(const ExcursionTable& source, const ExcursionTable& rest, std::span<const lattice::Step> prefix) {
  if (prefix.empty()) return 1.0;
  CompensatedSum<double> total;
  for (const auto& e : source.entries) {
    const auto steps = e.path.steps();
    if (steps.size() >= prefix.size()) {
      if (starts_with(steps, prefix)) total += e.weight;
    } else if (starts_with(prefix, steps)) {
      total += e.weight * cylinder_mass(rest, rest, prefix.subspan(steps.size()));
    }
  }
  return total.value() / source.Z_trunc;
}

}  // namespace

double q_cylinder_probability(const ExcursionTable& table_first, const ExcursionTable& table, const LatticePath& prefix) {
  return cylinder_mass(table_first, table, prefix.steps());
}

bool CylinderReport::all_stabilized() const {
  return std::all_of(rows.begin(), rows.end(), [](const CylinderRow& r) { return r.stabilized; });
}

CylinderReport cylinder_diagnostics(const std::vector<LatticePath>& cylinders, const std::vector<int>& r_list, int L0,
                                    std::size_t num_accepted, std::uint64_t seed, const ExcursionTable& table_first,
                                    const ExcursionTable& table, int threads) {
  if (r_list.empty()) throw InvalidArgument("r_list must be nonempty");
  const int r_min = *std::min_element(r_list.begin(), r_list.end());
  for (const auto& c : cylinders) {
    if (c.length() > 6) throw InvalidArgument("cylinders must have length <= 6");
    if (static_cast<int>(c.length()) > r_min) throw InvalidArgument("cylinder longer than the smallest r");
  }
  CylinderReport report;
  report.L0 = L0;
  report.r_list = r_list;
  for (const auto& c : cylinders) {
    CylinderRow row;
    row.cylinder = c;
    row.q_value = q_cylinder_probability(table_first, table, c);
    report.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    RejectionConfig cfg;
    cfg.r = r_list[i];
    cfg.L0 = L0;
    cfg.num_accepted = num_accepted;
    cfg.seed = derive_seed(seed, 1000 + i);
    cfg.threads = threads;
    RejectionResult run = rejection_conditional(cfg);
    for (auto& row : report.rows) {
      CylinderPoint point;
      point.r = cfg.r;
      point.samples = run.accepted.size();
      for (const auto& p : run.accepted) {
        if (starts_with(p.steps(), row.cylinder.steps())) ++point.hits;
      }
      const double n = static_cast<double>(point.samples);
      point.estimate = static_cast<double>(point.hits) / n;
      point.std_error = std::sqrt(std::max(point.estimate * (1.0 - point.estimate), 0.25 / n) / n);
      row.points.push_back(point);
    }
    run.accepted.clear();
    run.accepted.shrink_to_fit();
    report.runs.push_back(std::move(run));
  }
  for (auto& row : report.rows) {
    int direction = 0;
    for (std::size_t i = 1; i < row.points.size(); ++i) {
      const auto& a = row.points[i - 1];
      const auto& b = row.points[i];
      const double diff = b.estimate - a.estimate;
      const double sigma = std::hypot(a.std_error, b.std_error);
      if (std::abs(diff) > 3.0 * sigma) row.stabilized = false;
      const int d = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
      if (d != 0 && direction != 0 && d != direction) row.monotone = false;
      if (d != 0) direction = d;
    }
    const auto& last = row.points.back();
    row.divergent = std::abs(last.estimate - row.q_value) > 3.0 * last.std_error + table.truncated_mass_fraction;
  }
  return report;
}

}  // namespace blt::regen
