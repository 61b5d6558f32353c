// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Finite nearest-neighbour paths on Z and the event predicates built on them.
//
// Local time convention: L(t, x) counts visits at times 1..t. The visit at
// time 0 is NOT counted, so the starting site may be revisited L0 times
// before the bound bites. Small-n probabilities depend on this choice.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace blt::lattice {

using Step = std::int8_t;

class LatticePath {
 public:
  LatticePath() = default;
  /// Throws InvalidArgument unless every step is +1 or -1.
  explicit LatticePath(std::vector<Step> steps);
  LatticePath(std::initializer_list<int> steps);

  /// Builds a path from positions starting at 0 with unit increments.
  static LatticePath from_positions(std::span<const int> positions);

  std::span<const Step> steps() const { return steps_; }
  std::size_t length() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  /// S_0 = 0, S_i = S_{i-1} + step_i; size length() + 1.
  std::vector<int> positions() const;
  int end_position() const;

  /// Concatenation: `other` is translated to start where this path ends.
  LatticePath concatenated(const LatticePath& other) const;
  /// Steps [begin, end) as a path of its own (translated to start at 0).
  LatticePath slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const LatticePath&, const LatticePath&) = default;

 private:
  std::vector<Step> steps_;
};

/// site -> number of visits at times 1..m. Unvisited sites are absent.
using LocalTimeProfile = std::map<int, int>;

struct EventParams {
  int L0 = 2;  ///< visit bound
  int n = 0;   ///< target level

  /// Throws InvalidArgument for L0 < 1 or n < 0; warns for L0 == 1.
  void validate() const;
};

LocalTimeProfile local_time_profile(const LatticePath& path);

/// Largest entry of the profile (0 for the empty path).
int max_local_time(const LatticePath& path);

/// Smallest i >= 1 with S_i = level. The caller handles tau_0 = 0.
std::optional<std::size_t> first_hit(const LatticePath& path, int level);

/// Path is exactly (S_0..S_{tau_n}) and every local time is <= L0.
bool is_B(const LatticePath& path, const EventParams& params);

/// is_B plus 0 < S_i < n for 1 <= i < tau_n. For n = 0 only the empty path
/// qualifies (B_0^+ is the certain event).
bool is_B_plus(const LatticePath& path, const EventParams& params);

/// For a path in B_n^+: true iff no 0 < k < n splits it at tau_k into a
/// B_k^+ prefix and a (translated) B_{n-k}^+ suffix. Throws
/// ContractViolation when the path is not in B_n^+.
bool is_irreducible(const LatticePath& path, const EventParams& params);

struct RegenerationLevel {
  int level;          ///< nu_j
  std::size_t time;   ///< sigma_j = first hitting time of nu_j
};

/// Levels >= 1 that the prefix certifies as regeneration levels: hit at some
/// tau < length and strictly exceeded at every later time of the prefix.
std::vector<RegenerationLevel> regeneration_levels(const LatticePath& path);

/// Excursion classes: M_m (allow_negative = false) and the first-excursion
/// class M~_m (allow_negative = true). Members have length >= 1, local times
/// <= L0, a strict maximum at the final step, and no level in [1, S_m) after
/// whose first hit the path stays strictly above it. M_m additionally
/// requires S_i > 0 for 1 <= i <= m.
bool in_excursion_class(const LatticePath& path, int L0, bool allow_negative);

/// Upper bound on the length of any B_n^+ path: L0 (n - 1) + 1.
std::size_t max_b_plus_length(int n, int L0);

}  // namespace blt::lattice
