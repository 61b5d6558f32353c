// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// The limit measure Q as an i.i.d. sequence of excursions: a first excursion
// from the M~ table followed by independent draws from the M table, each
// chosen with probability proportional to e^{c4 h} 2^{-m} (h = height,
// m = length). Also a brute-force rejection sampler for P(. | B_r) and
// cylinder diagnostics comparing the two.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lattice/lattice_core.hpp"

namespace blt::regen {

using lattice::LatticePath;

enum class ExcursionClass { M, M_tilde };

std::string to_string(ExcursionClass cls);
ExcursionClass excursion_class_from_string(const std::string& name);

struct ExcursionEntry {
  LatticePath path;
  int height = 0;
  double weight = 0.0;
};

struct ExcursionTable {
  int L0 = 0;
  double c4 = 0.0;
  int m_max = 0;
  ExcursionClass cls = ExcursionClass::M;
  std::vector<ExcursionEntry> entries;
  double Z_trunc = 0.0;
  /// weight of the entries of length m_max (and m_max - 1) over Z_trunc
  double truncated_mass_fraction = 0.0;
  std::vector<double> cumulative;  ///< running weight sums, for sampling

  /// Index of the entry selected by u in [0, 1).
  std::size_t pick(double u) const;
  /// sum of w h / sum of w m over the table
  double exact_speed() const;
};

/// Every class member of length <= m_max with its weight. Throws
/// InvalidArgument unless c4 is in (0, log 2] and m_max >= 1, ResourceError
/// past the node budget.
ExcursionTable build_excursion_table(int L0, double c4, int m_max, ExcursionClass cls,
                                     std::uint64_t node_budget = 100'000'000);

struct RegenPath {
  std::vector<LatticePath> excursions;  ///< first excursion, then i.i.d. ones
  std::vector<int> nu;                  ///< nu[j] = end level of excursion j
  std::vector<std::size_t> sigma;       ///< sigma[j] = end time of excursion j

  LatticePath path() const;
};

/// Samples `num_excursions` excursions (the first from `table_first`).
RegenPath sample_regen_path(const ExcursionTable& table_first, const ExcursionTable& table,
                            std::size_t num_excursions, std::uint64_t seed);

struct SpeedEstimate {
  int L0 = 0;
  double c4 = 0.0;
  int m_max = 0;
  double gamma_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.99;
  std::size_t num_excursions = 0;
  std::size_t num_replicas = 0;
  std::vector<double> replica_gamma;
  double regression_slope = 0.0;  ///< least-squares slope of nu_j on sigma_j
  double table_speed = 0.0;       ///< exact ratio of the truncated tables
  double truncated_mass_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Ratio of mean height to mean length over i.i.d. excursions (the first
/// excursion is excluded), with a delta-method 99% interval. Replicas draw
/// num_excursions / num_replicas excursions each from independent streams.
SpeedEstimate estimate_speed(const ExcursionTable& table_first, const ExcursionTable& table,
                             std::size_t num_excursions, std::size_t num_replicas, std::uint64_t seed,
                             int threads = 1);
SpeedEstimate estimate_speed(int L0, double c4, int m_max, std::size_t num_excursions, std::size_t num_replicas,
                             std::uint64_t seed, int threads = 1);

struct RejectionConfig {
  int r = 1;
  int L0 = 2;
  std::size_t num_accepted = 1000;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 2'000'000'000;
  std::size_t batch_size = 4096;  ///< attempts per independent stream
  int threads = 1;
  bool keep_paths = true;

  void validate() const;
};

struct RejectionResult {
  RejectionConfig config;
  std::vector<LatticePath> accepted;
  std::size_t num_accepted = 0;
  std::uint64_t attempts = 0;
  std::uint64_t plus_first = 0;  ///< accepted paths with S_1 = +1
  double acceptance_rate() const { return attempts ? static_cast<double>(num_accepted) / static_cast<double>(attempts) : 0.0; }
  /// binomial standard error of acceptance_rate
  double acceptance_std_error() const;
};

/// Exact draws from P(. | B_r): simple random walk run to tau_r, abandoned
/// the moment any local time exceeds L0. Throws TimeoutError when
/// max_attempts are spent before num_accepted paths are found.
RejectionResult rejection_conditional(const RejectionConfig& config);

/// Q-probability that the path starts with `prefix`, computed exactly from
/// the truncated tables (normalized by their Z_trunc).
double q_cylinder_probability(const ExcursionTable& table_first, const ExcursionTable& table,
                              const LatticePath& prefix);

struct CylinderPoint {
  int r = 0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct CylinderRow {
  LatticePath cylinder;
  std::vector<CylinderPoint> points;  ///< one per r
  double q_value = 0.0;
  bool monotone = true;    ///< estimates move in one direction across r
  bool stabilized = true;  ///< consecutive estimates agree within 3 combined sigma
  bool divergent = false;  ///< last estimate differs from q_value by more than 3 sigma (+ truncation)
};

struct CylinderReport {
  int L0 = 0;
  std::vector<int> r_list;
  std::vector<CylinderRow> rows;
  std::vector<RejectionResult> runs;  ///< paths dropped
  bool all_stabilized() const;
};

/// Estimates P(cylinder | B_r) for every cylinder and r by rejection and
/// compares with the Q-side value. Cylinders must not be longer than 6 or
/// than the smallest r.
CylinderReport cylinder_diagnostics(const std::vector<LatticePath>& cylinders, const std::vector<int>& r_list,
                                    int L0, std::size_t num_accepted, std::uint64_t seed,
                                    const ExcursionTable& table_first, const ExcursionTable& table, int threads = 1);

}  // namespace blt::regen
