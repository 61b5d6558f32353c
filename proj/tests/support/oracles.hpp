// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lattice/dyadic.hpp"
#include "lattice/lattice_core.hpp"

namespace blt::testing {

using lattice::BigInt;
using lattice::DyadicProb;
using lattice::LatticePath;

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// P(B_n^+) (irreducible_only = false) or P(L_n) via edge up-crossing counts.
/// u_x = number of up-crossings of (x, x+1), u_0 = u_{n-1} = 1, site x is
/// visited u_{x-1} + u_x - 1 times, and the number of paths with a given
/// crossing vector is prod_x C(u_{x-1} + u_x - 2, u_{x-1} - 1).
inline DyadicProb crossing_oracle(int n, int L0, bool irreducible_only) {
  if (n == 0) return irreducible_only ? DyadicProb::zero() : DyadicProb::one();
  if (n == 1) return DyadicProb::inverse_power_of_two(1);
  DyadicProb total;
  std::vector<int> u(static_cast<std::size_t>(n), 1);
  std::function<void(int)> rec = [&](int x) {
    if (x == n - 1) {
      u[static_cast<std::size_t>(x)] = 1;
      BigInt count = 1;
      int length = 0;
      for (int y = 1; y <= n - 1; ++y) {
        const int a = u[static_cast<std::size_t>(y - 1)];
        const int b = u[static_cast<std::size_t>(y)];
        const int visits = a + b - 1;
        if (visits > L0) return;
        if (irreducible_only && visits < 2) return;
        count *= binomial(a + b - 2, a - 1);
      }
      for (int y = 0; y < n; ++y) length += 2 * u[static_cast<std::size_t>(y)] - 1;
      total += DyadicProb(count, static_cast<std::uint32_t>(length));
      return;
    }
    for (int v = 1; v <= L0; ++v) {
      u[static_cast<std::size_t>(x)] = v;
      rec(x + 1);
    }
  };
  u[0] = 1;
  rec(1);
  return total;
}

/// Calls visit(path) for every +-1 path of length exactly m.
inline void for_each_path(int m, const std::function<void(const LatticePath&)>& visit) {
  std::vector<lattice::Step> steps(static_cast<std::size_t>(m));
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    for (int i = 0; i < m; ++i) steps[static_cast<std::size_t>(i)] = ((mask >> i) & 1U) ? 1 : -1;
    visit(LatticePath(steps));
  }
}

/// Power-series J0 with exact rational coefficients evaluated in long double.
inline long double reference_j0(long double x) {
  long double term = 1.0L;
  long double sum = 1.0L;
  const long double q = x * x / 4.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-30L) break;
  }
  return sum;
}

}  // namespace blt::testing
