// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exhaustive enumeration of constrained walks and the exact probabilities and
// renewal constants derived from them. Everything up to the C4 root-finding
// is exact dyadic arithmetic; floating point enters only in estimate_C4 and
// constants_report and is confined to the functions that say so.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lattice/dyadic.hpp"
#include "lattice/lattice_core.hpp"

namespace blt::enumeration {

using lattice::DyadicProb;
using lattice::LatticePath;
using lattice::BigInt;
using lattice::ProbInterval;

inline constexpr std::uint64_t kDefaultNodeBudget = 100'000'000;

struct EnumConfig {
  int L0 = 2;
  int n_max = 10;
  int max_len = 48;    ///< cap on path length for the unconfined (B_n) search
  int max_depth = 16;  ///< cap on how far below 0 the unconfined search may go
  std::uint64_t node_budget = kDefaultNodeBudget;
  int threads = 1;
  bool reverse_order = false;  ///< explore the -1 child first

  void validate() const;
};

// ---------------------------------------------------------------------------
// Confined events B_n^+ and L_n
// ---------------------------------------------------------------------------

struct PlusEnumeration {
  int n = 0;
  DyadicProb b_plus;        ///< P(B_n^+)
  DyadicProb irreducible;   ///< P(L_n)
  std::uint64_t b_plus_paths = 0;
  std::uint64_t irreducible_paths = 0;
  std::uint64_t nodes = 0;
};

/// Enumerates every B_n^+ path (length <= L0 (n-1) + 1) and classifies each as
/// irreducible or not. Throws ResourceError past `node_budget` expansions.
PlusEnumeration enumerate_b_plus(int n, int L0, std::uint64_t node_budget = kDefaultNodeBudget,
                                 bool reverse_order = false);

/// P(B_n^+); P(B_0^+) = 1.
DyadicProb prob_B_plus(int n, int L0, std::uint64_t node_budget = kDefaultNodeBudget);
/// P(L_n) for n >= 1; P(L_1) = 1/2.
DyadicProb prob_L(int n, int L0, std::uint64_t node_budget = kDefaultNodeBudget);

/// Calls `visit` with every B_n^+ path. Intended for tests and small n.
void for_each_b_plus_path(int n, int L0, const std::function<void(const LatticePath&)>& visit);

// ---------------------------------------------------------------------------
// Unconfined event B_n, bracketed
// ---------------------------------------------------------------------------

struct BBracket {
  int n = 0;
  ProbInterval interval;
  DyadicProb tail_frontier;   ///< exact mass of surviving prefixes cut off by the caps
  DyadicProb tail_geometric;  ///< (1 - 2^{-(2L0+2)})^{floor(J / (2L0+2))}
  int tail_horizon = 0;       ///< J used in the geometric bound
};

struct BTable {
  EnumConfig config;
  std::vector<BBracket> rows;  ///< rows[n], n = 0..n_max
  std::uint64_t nodes = 0;
};

/// One search over all walks of length <= max_len and depth <= max_depth
/// brackets P(B_n) for every n <= n_max at once. lower = exact mass of the
/// B_n paths found; upper = lower + min(frontier tail, geometric tail).
BTable enumerate_B(const EnumConfig& config);

/// P(B_n) bracket; runs enumerate_B with n_max = n.
ProbInterval prob_B(int n, const EnumConfig& config);

/// (1 - 2^{-w})^{floor(horizon / w)} with w = 2 L0 + 2: a bound on the chance
/// that `horizon` steps pass without any local time exceeding L0.
DyadicProb geometric_tail_bound(int L0, int horizon);

// ---------------------------------------------------------------------------
// Renewal identity and constants
// ---------------------------------------------------------------------------

struct RenewalRow {
  int n = 0;
  DyadicProb lhs;  ///< P(B_n^+)
  DyadicProb rhs;  ///< sum_{j=1}^n P(L_j) P(B_{n-j}^+)
  bool pass = false;
};

struct RenewalReport {
  int L0 = 0;
  std::vector<RenewalRow> rows;  ///< n = 1..n_max
  bool all_pass() const;
};

RenewalReport renewal_check(int n_max, int L0);

/// Same check from precomputed tables (index n = 0..N).
RenewalReport renewal_check(std::span<const DyadicProb> b_plus, std::span<const DyadicProb> irreducible, int L0);

/// Unique root c in (1e-9, log 2] of sum_{n=1}^{N} e^{c n} p_n = 1, by
/// bisection to 1e-10. prob_L[n] is P(L_n); prob_L[0] is ignored. Throws
/// ConvergenceError when no root lies in the interval.
double truncated_root(std::span<const DyadicProb> prob_L);

struct C4Estimate {
  int L0 = 0;
  int n_max = 0;
  double point = 0.0;  ///< root at n_max
  double low = 0.0;    ///< == point
  double high = 0.0;   ///< root at ceil(n_max / 2)
  std::vector<std::pair<int, double>> roots;  ///< (N, root(N)) for N = ceil(n_max/2)..n_max
  bool monotone = true;  ///< roots non-increasing in N
};

C4Estimate estimate_C4(int L0, int n_max);
C4Estimate estimate_C4(std::span<const DyadicProb> prob_L, int L0);

struct InequalityReport {
  std::size_t submultiplicative_checks = 0;
  std::size_t submultiplicative_violations = 0;
  std::size_t doubling_checks = 0;
  std::size_t doubling_violations = 0;
  bool ok() const { return submultiplicative_violations == 0 && doubling_violations == 0; }
};

/// Exact checks lower(P(B_{s+t})) <= upper(P(B_s)) upper(P(B_t)) and
/// lower(P(B_t)) <= 2^s upper(P(B_{t+s})) over every pair in the table.
InequalityReport check_inequalities(const BTable& table);

struct ConstantsReport {
  int L0 = 0;
  EnumConfig truncation;
  C4Estimate c4;
  double c4_certified_lower = 0.0;  ///< max_n -log(upper P(B_n)) / n
  int c4_certified_lower_n = 0;
  std::vector<DyadicProb> prob_b_plus;  ///< n = 0..n_max
  std::vector<DyadicProb> prob_L;       ///< n = 0..n_max (prob_L[0] = 0)
  std::vector<ProbInterval> prob_B;     ///< n = 0..n_max
  std::vector<double> f;                ///< e^{c n} P(L_n)
  std::vector<double> u;                ///< e^{c n} P(B_n^+)
  double mu_hat = 0.0;
  double C6_hat = 0.0;
  double C5_hat = 0.0;
  double C3_witness = 0.0;  ///< min_n P(B_n^+) / upper(P(B_n))
  std::pair<double, double> C7_bracket{0.0, 0.0};
  double u_variation_last_third = 0.0;  ///< (max - min) / mean of u_n over the last third
  InequalityReport inequalities;
  std::uint64_t nodes = 0;
};

ConstantsReport constants_report(int L0, const EnumConfig& config);

// ---------------------------------------------------------------------------
// Excursion classes
// ---------------------------------------------------------------------------

/// Every member of M_m (allow_negative = false) or M~_m (true) with
/// 1 <= m <= m_max, in search order.
std::vector<LatticePath> enumerate_excursions(int L0, int m_max, bool allow_negative,
                                              std::uint64_t node_budget = kDefaultNodeBudget);

struct ClassSumRow {
  int k = 0;
  DyadicProb class_M;        ///< sum of 2^{-m} over M members of height k
  DyadicProb class_M_tilde;  ///< same over M~ members of length <= m_max
  DyadicProb prob_L;
  bool M_matches = false;
  bool M_tilde_matches = false;
};

/// Compares class masses by height with P(L_k), k = 1..k_max. M~ is
/// truncated at length m_max_tilde.
std::vector<ClassSumRow> excursion_class_sums(int L0, int k_max, int m_max_tilde);

}  // namespace blt::enumeration
