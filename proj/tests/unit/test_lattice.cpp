// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <vector>

#include "common/error.hpp"
#include "lattice/dyadic.hpp"
#include "lattice/lattice_core.hpp"
#include "support/oracles.hpp"

using namespace blt;
using namespace blt::lattice;

TEST_CASE("paths reject steps other than +-1") {
  CHECK_THROWS_AS(LatticePath(std::vector<Step>{1, 0}), InvalidArgument);
  CHECK_THROWS_AS((LatticePath{1, 2}), InvalidArgument);
  const std::vector<int> bad{0, 2};
  CHECK_THROWS_AS(LatticePath::from_positions(bad), InvalidArgument);
}

TEST_CASE("positions, concatenation and slicing") {
  const LatticePath p{1, 1, -1, 1};
  CHECK(p.positions() == std::vector<int>{0, 1, 2, 1, 2});
  CHECK(p.end_position() == 2);
  const LatticePath q = p.concatenated(LatticePath{-1, -1});
  CHECK(q.end_position() == 0);
  CHECK(q.slice(2, 4) == LatticePath{-1, 1});
  const std::vector<int> pos{0, -1, 0, 1};
  CHECK(LatticePath::from_positions(pos) == LatticePath{-1, 1, 1});
}

TEST_CASE("local time excludes time zero") {
  const LatticePath p{1, -1, 1, -1};
  const auto profile = local_time_profile(p);
  CHECK(profile.at(0) == 2);
  CHECK(profile.at(1) == 2);
  CHECK(max_local_time(p) == 2);
  CHECK(max_local_time(LatticePath{}) == 0);
}

TEST_CASE("B and B+ membership on small examples") {
  CHECK(is_B(LatticePath{}, {2, 0}));
  CHECK(is_B_plus(LatticePath{}, {2, 0}));
  CHECK(is_B(LatticePath{-1, 1, 1}, {2, 1}));
  CHECK_FALSE(is_B_plus(LatticePath{-1, 1, 1}, {2, 1}));
  CHECK(is_B_plus(LatticePath{1, 1, -1, 1}, {2, 2}) == false);  // hits 2 before the end
  CHECK(is_B_plus(LatticePath{1, -1}, {2, 0}) == false);
  CHECK(is_B_plus(LatticePath{1, 1, -1, 1, 1}, {2, 3}));
  // site 1 visited three times
  CHECK_FALSE(is_B(LatticePath{1, -1, 1, -1, 1, 1}, {2, 2}));
  CHECK(is_B(LatticePath{1, -1, 1, -1, 1, 1}, {3, 2}));
}

TEST_CASE("irreducibility and its contract") {
  CHECK(is_irreducible(LatticePath{1}, {2, 1}));
  CHECK_FALSE(is_irreducible(LatticePath{1, 1}, {2, 2}));
  CHECK_FALSE(is_irreducible(LatticePath{1, 1, 1}, {2, 3}));
  CHECK_FALSE(is_irreducible(LatticePath{1, 1, -1, 1, 1, 1}, {2, 4}));
  CHECK_THROWS_AS(is_irreducible(LatticePath{-1, 1, 1}, {2, 1}), ContractViolation);
  // 0 1 2 1 2 3: sites 1 and 2 visited twice
  CHECK(is_irreducible(LatticePath{1, 1, -1, 1, 1}, {2, 3}));
}

TEST_CASE("irreducible B+ paths are exactly those with every interior site visited twice") {
  for (int L0 : {2, 3}) {
    for (int n = 2; n <= 5; ++n) {
      const int max_len = static_cast<int>(max_b_plus_length(n, L0));
      for (int m = n; m <= max_len; ++m) {
        testing::for_each_path(m, [&](const LatticePath& p) {
          if (!is_B_plus(p, {L0, n})) return;
          const auto profile = local_time_profile(p);
          bool twice = true;
          for (int x = 1; x < n; ++x) twice = twice && profile.at(x) >= 2;
          CHECK(is_irreducible(p, {L0, n}) == twice);
        });
      }
    }
  }
}

TEST_CASE("regeneration levels of a prefix") {
  const LatticePath p{1, 1, -1, 1, 1, 1};
  // positions 0 1 2 1 2 3 4; levels 3 (t=5) certified, 4 is the endpoint
  const auto levels = regeneration_levels(p);
  REQUIRE(levels.size() == 1);
  CHECK(levels[0].level == 3);
  CHECK(levels[0].time == 5);
  CHECK(regeneration_levels(LatticePath{}).empty());
}

TEST_CASE("excursion class membership") {
  CHECK(in_excursion_class(LatticePath{1}, 2, false));
  CHECK(in_excursion_class(LatticePath{1}, 2, true));
  CHECK_FALSE(in_excursion_class(LatticePath{1, 1}, 2, false));
  CHECK(in_excursion_class(LatticePath{1, 1, -1, 1}, 2, false) == false);
  CHECK(in_excursion_class(LatticePath{1, 1, -1, -1, 1, 1, 1}, 3, false) == false);
  CHECK(in_excursion_class(LatticePath{-1, 1, 1}, 2, true));
  CHECK_FALSE(in_excursion_class(LatticePath{-1, 1, 1}, 2, false));
  CHECK_FALSE(in_excursion_class(LatticePath{}, 2, true));
}

TEST_CASE("dyadic arithmetic") {
  const DyadicProb half = DyadicProb::inverse_power_of_two(1);
  CHECK(half + half == DyadicProb::one());
  CHECK((half * half).to_string() == "1/2^2");
  CHECK(DyadicProb::from_count(6, 4).to_string() == "3/2^3");
  CHECK(DyadicProb::one() - half == half);
  CHECK_THROWS_AS(half - DyadicProb::one(), DomainError);
  CHECK(half < DyadicProb::one());
  CHECK(half.scaled_by_power_of_two(1) == DyadicProb::one());
  CHECK(DyadicProb::inverse_power_of_two(3000).log() == doctest::Approx(-3000 * 0.6931471805599453));
  CHECK(DyadicProb::from_count(5, 5).to_double() == doctest::Approx(5.0 / 32.0));
  const ProbInterval iv{half, DyadicProb::one()};
  CHECK(iv.contains(DyadicProb::from_count(3, 2)));
  CHECK_FALSE(iv.contains(DyadicProb::zero()));
}
