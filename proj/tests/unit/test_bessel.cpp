// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

#include "bessel/bessel_numerics.hpp"
#include "common/error.hpp"

using namespace blt;
using namespace blt::bessel;

namespace {

// 50-term J0 series in exact rational arithmetic at rational x = num / den.
double rational_j0(int num, int den) {
  using boost::multiprecision::cpp_rational;
  const cpp_rational q = cpp_rational(num * num, 4 * den * den);
  cpp_rational term = 1;
  cpp_rational sum = 1;
  for (int k = 1; k < 50; ++k) {
    term *= -q / (k * k);
    sum += term;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("J0 series against exact rational sums and the standard library") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(bessel_j1(0.0) == 0.0);
  const std::pair<int, int> grid[] = {{1, 2}, {1, 1}, {2, 1}, {3, 1}, {5, 1}};
  for (const auto& [num, den] : grid) {
    const double x = static_cast<double>(num) / den;
    CHECK(std::abs(bessel_j0(x) - rational_j0(num, den)) < 1e-12);
  }
  for (double x = 0.0; x <= 20.0; x += 0.37) {
    CHECK(std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)) < 1e-12);
    CHECK(std::abs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)) < 1e-12);
  }
  CHECK(std::abs(bessel_j0(20.0) - std::cyl_bessel_j(0.0, 20.0)) < 1e-12);
  CHECK(std::abs(bessel_j0(2.4048)) < 1e-4);
  CHECK_THROWS_AS(bessel_j0(-0.1), DomainError);
  CHECK_THROWS_AS(bessel_j0(20.5), DomainError);
  CHECK_THROWS_AS(bessel_j1(std::nan("")), DomainError);
}

TEST_CASE("first zero of J0") {
  const auto root = find_j0();
  CHECK(std::abs(root.j0 - 2.404825557695773) < 1e-12);
  CHECK(std::abs(root.j0 - 2.4048) < 1e-4);
  CHECK(root.hi - root.lo <= 1e-13);
  CHECK(bessel_j0(root.lo) > 0.0);
  CHECK(bessel_j0(root.hi) <= 0.0);
  CHECK(root.dj0 == doctest::Approx(-std::cyl_bessel_j(1.0, root.j0)).epsilon(1e-12));
  CHECK(bessel_j0(root.j0 - 0.1) > 0.0);
  for (double x = 0.01; x <= root.j0 - 1e-6; x += 1e-3) CHECK(bessel_j0(x) > 0.0);
}

TEST_CASE("adaptive quadrature") {
  CHECK(std::abs(integrate([](double x) { return x; }, 0.0, 1.0) - 0.5) < 1e-12);
  CHECK(std::abs(integrate([](double x) { return x * x * x; }, 0.0, 1.0) - 0.25) < 1e-12);
  CHECK(std::abs(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) - 2.0) < 1e-12);
  CHECK(std::abs(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0) - 2.0 / 3.0) < 1e-12);
  CHECK(integrate([](double x) { return x; }, 1.0, 1.0) == 0.0);
  QuadratureConfig tight;
  tight.max_subdivisions = 3;
  CHECK_THROWS_AS(integrate([](double x) { return std::abs(x - 0.3337); }, 0.0, 1.0, tight), ConvergenceError);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0), DomainError);
  QuadratureConfig bad;
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("Bessel integral identities") {
  const auto root = find_j0();
  CHECK(schafheitlin_residual(1.0, root.j0) < 1e-9);
  CHECK(schafheitlin_residual(0.0, 1.0) < 1e-9);
  CHECK(schafheitlin_residual(2.0, 5.0) < 1e-8);
  CHECK(schafheitlin_residual(0.5, 3.3) < 1e-9);
  CHECK(orthogonality_residual() < 1e-9);
  const double direct = integrate(
      [](double x) {
        const double j = std::cyl_bessel_j(0.0, x);
        return x * j * j;
      },
      0.0, root.j0);
  const double j1 = std::cyl_bessel_j(1.0, root.j0);
  CHECK(std::abs(direct - 0.5 * root.j0 * root.j0 * j1 * j1) < 1e-9);
}

TEST_CASE("m0, gamma0 and the invariant density") {
  const auto m0 = compute_m0();
  CHECK(std::abs(m0.ratio - m0.closed) < 1e-8);
  const double j0 = 2.404825557695773;
  CHECK(m0.closed == doctest::Approx((1.0 - 2.0 / (j0 * j0)) / 3.0).epsilon(1e-12));
  CHECK(m0.closed == doctest::Approx(0.2180566206).epsilon(1e-9));
  const double gamma0 = compute_gamma0();
  CHECK(std::abs(gamma0 - 4.5860) < 5e-4);
  CHECK(std::abs(gamma0 * m0.closed - 1.0) < 1e-12);
  CHECK(gamma0 / 2.0 == doctest::Approx(2.2930).epsilon(1e-4));
  CHECK(std::abs(invariant_density_moment(0) - 1.0) < 1e-12);
  const double p2 = invariant_density_moment(2);
  CHECK(std::abs(p2 - m0.closed) < 1e-8);
  CHECK(p2 > 0.0);
  CHECK(p2 < 1.0);
  CHECK(invariant_density_moment(4) < p2);
  CHECK_THROWS_AS(invariant_density_moment(9), InvalidArgument);
}

TEST_CASE("continuous constants") {
  const auto c = constants_continuous();
  CHECK(c.lambda0 == 0.5 * c.j0 * c.j0);
  const double j1 = std::cyl_bessel_j(1.0, c.j0);
  CHECK(c.C == doctest::Approx(std::numbers::pi * j1 * j1).epsilon(1e-10));
  CHECK(std::abs(c.gamma0 * c.m0 - 1.0) < 1e-12);
}

TEST_CASE("radial log-gradient of the principal eigenfunction") {
  const double j0 = find_j0().j0;
  const RadialLogGradient grad(j0);
  CHECK(grad(0.0) == 0.0);
  for (double r = 0.0; r < 0.999; r += 0.0371) {
    const double expected = -j0 * std::cyl_bessel_j(1.0, j0 * r) / std::cyl_bessel_j(0.0, j0 * r);
    CHECK(grad(r) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(grad.phi(r) == doctest::Approx(std::cyl_bessel_j(0.0, j0 * r)).epsilon(1e-12));
  }
  CHECK(grad(0.999999) < -1e5);
}
