// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "lattice/lattice_core.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"

namespace blt::lattice {

LatticePath::LatticePath(std::vector<Step> steps) : steps_(std::move(steps)) {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i] != 1 && steps_[i] != -1) {
      throw InvalidArgument("LatticePath: step " + std::to_string(i) + " is not +1/-1");
    }
  }
}

namespace {

std::vector<Step> to_steps(std::initializer_list<int> steps) {
  std::vector<Step> out;
  out.reserve(steps.size());
  for (int s : steps) {
    if (s != 1 && s != -1) throw InvalidArgument("LatticePath: steps must be +1 or -1");
    out.push_back(static_cast<Step>(s));
  }
  return out;
}

}  // namespace

LatticePath::LatticePath(std::initializer_list<int> steps) : steps_(to_steps(steps)) {}

LatticePath LatticePath::from_positions(std::span<const int> positions) {
  if (positions.empty() || positions.front() != 0) {
    throw InvalidArgument("LatticePath::from_positions: positions must start at 0");
  }
  std::vector<Step> steps;
  steps.reserve(positions.size() - 1);
  for (std::size_t i = 1; i < positions.size(); ++i) {
    steps.push_back(static_cast<Step>(positions[i] - positions[i - 1]));
  }
  return LatticePath(std::move(steps));
}

std::vector<int> LatticePath::positions() const {
  std::vector<int> out(steps_.size() + 1);
  out[0] = 0;
  for (std::size_t i = 0; i < steps_.size(); ++i) out[i + 1] = out[i] + steps_[i];
  return out;
}

int LatticePath::end_position() const {
  int pos = 0;
  for (Step s : steps_) pos += s;
  return pos;
}

LatticePath LatticePath::concatenated(const LatticePath& other) const {
  LatticePath out = *this;
  out.steps_.insert(out.steps_.end(), other.steps_.begin(), other.steps_.end());
  return out;
}

LatticePath LatticePath::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > steps_.size()) throw InvalidArgument("LatticePath::slice: bad range");
  LatticePath out;
  out.steps_.assign(steps_.begin() + static_cast<std::ptrdiff_t>(begin),
                    steps_.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

void EventParams::validate() const {
  if (L0 < 1) throw InvalidArgument("L0 must be >= 1, got " + std::to_string(L0));
  if (n < 0) throw InvalidArgument("n must be >= 0, got " + std::to_string(n));
  if (L0 == 1) log::warn("L0 = 1 is outside the regime L0 >= 2 covered by the theory");
}

LocalTimeProfile local_time_profile(const LatticePath& path) {
  LocalTimeProfile profile;
  int pos = 0;
  for (Step s : path.steps()) {
    pos += s;
    ++profile[pos];
  }
  return profile;
}

int max_local_time(const LatticePath& path) {
  int best = 0;
  for (const auto& [site, count] : local_time_profile(path)) best = std::max(best, count);
  return best;
}

std::optional<std::size_t> first_hit(const LatticePath& path, int level) {
  int pos = 0;
  std::size_t i = 0;
  for (Step s : path.steps()) {
    pos += s;
    ++i;
    if (pos == level) return i;
  }
  return std::nullopt;
}

bool is_B(const LatticePath& path, const EventParams& params) {
  if (params.n == 0) return path.empty();
  const auto hit = first_hit(path, params.n);
  if (!hit || *hit != path.length()) return false;
  return max_local_time(path) <= params.L0;
}

bool is_B_plus(const LatticePath& path, const EventParams& params) {
  if (!is_B(path, params)) return false;
  const auto pos = path.positions();
  for (std::size_t i = 1; i + 1 < pos.size(); ++i) {
    if (pos[i] <= 0 || pos[i] >= params.n) return false;
  }
  return true;
}

bool is_irreducible(const LatticePath& path, const EventParams& params) {
  if (!is_B_plus(path, params)) {
    throw ContractViolation("is_irreducible: path is not in B_n^+ for n = " + std::to_string(params.n));
  }
  if (params.n <= 1) return params.n == 1;
  for (int k = 1; k < params.n; ++k) {
    const auto tau_k = first_hit(path, k);
    if (!tau_k) continue;
    const LatticePath prefix = path.slice(0, *tau_k);
    const LatticePath suffix = path.slice(*tau_k, path.length());
    if (is_B_plus(prefix, {params.L0, k}) && is_B_plus(suffix, {params.L0, params.n - k})) return false;
  }
  return true;
}

std::vector<RegenerationLevel> regeneration_levels(const LatticePath& path) {
  const auto pos = path.positions();
  const std::size_t m = path.length();
  // suffix_min[i] = min_{t >= i} S_t
  std::vector<int> suffix_min(m + 2, std::numeric_limits<int>::max());
  for (std::size_t i = m + 1; i-- > 0;) suffix_min[i] = std::min(pos[i], suffix_min[i + 1]);

  std::vector<RegenerationLevel> out;
  int running_max = 0;
  for (std::size_t t = 1; t < m; ++t) {
    if (pos[t] > running_max) {
      running_max = pos[t];
      if (suffix_min[t + 1] > pos[t]) out.push_back({pos[t], t});
    }
  }
  return out;
}

bool in_excursion_class(const LatticePath& path, int L0, bool allow_negative) {
  const std::size_t m = path.length();
  if (m == 0) return false;
  const auto pos = path.positions();
  const int top = pos[m];
  for (std::size_t i = 0; i < m; ++i) {
    if (pos[i] >= top) return false;
  }
  if (!allow_negative) {
    for (std::size_t i = 1; i <= m; ++i) {
      if (pos[i] <= 0) return false;
    }
  }
  if (max_local_time(path) > L0) return false;
  for (int level = 1; level < top; ++level) {
    const auto tau = first_hit(path, level);
    if (!tau) return false;  // unreachable for nearest-neighbour paths
    bool stays_above = true;
    for (std::size_t t = *tau + 1; t <= m; ++t) {
      if (pos[t] <= level) {
        stays_above = false;
        break;
      }
    }
    if (stays_above) return false;
  }
  return true;
}

std::size_t max_b_plus_length(int n, int L0) {
  if (n <= 0) return 0;
  return static_cast<std::size_t>(L0) * static_cast<std::size_t>(n - 1) + 1;
}

}  // namespace blt::lattice
