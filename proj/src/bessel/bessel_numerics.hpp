// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// J0 and J1 by power series, the first zero j0 of J0, adaptive quadrature,
// and the constants of the unit-disk Dirichlet problem built from them.

#include <functional>
#include <vector>

namespace blt::bessel {

inline constexpr double kSeriesWindow = 20.0;

/// J0(x) for 0 <= x <= 20 (DomainError otherwise); absolute error <= 1e-12.
double bessel_j0(double x);
/// J1(x) on the same window. J0'(x) = -J1(x).
double bessel_j1(double x);

struct J0Root {
  double j0 = 0.0;
  double dj0 = 0.0;  ///< J0'(j0) = -J1(j0)
  double lo = 0.0;   ///< certified bracket: J0(lo) > 0 >= J0(hi)
  double hi = 0.0;
};

/// First positive zero of J0, bisected on [2, 3] to 1e-13.
J0Root find_j0();

struct QuadratureConfig {
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. The estimate stops once
/// the summed |K15 - G7| estimates drop below abs_tol, or below the rounding
/// floor 50 eps |value| when that is larger. Throws ConvergenceError after
/// max_subdivisions bisections.
QuadratureResult integrate_detailed(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureConfig& config = {});
double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureConfig& config = {});

/// |LHS - RHS| of Schafheitlin's reduction formula for x^{mu+2} J0^2 on [0, z].
double schafheitlin_residual(double mu, double z, const QuadratureConfig& config = {});

/// |int_0^{j0} x J0^2 dx - j0^2 J0'(j0)^2 / 2|
double orthogonality_residual(const QuadratureConfig& config = {});

struct M0Values {
  double ratio = 0.0;   ///< j0^{-2} int x^3 J0^2 / int x J0^2 over [0, j0]
  double closed = 0.0;  ///< (1 - 2 j0^{-2}) / 3
};

/// Both forms of m0; throws ConvergenceError if they differ by more than 1e-8.
M0Values compute_m0(const QuadratureConfig& config = {});

/// 3 / (1 - 2 j0^{-2})
double compute_gamma0();

/// E|X|^p under the density proportional to J0(j0 |x|)^2 on the unit disk.
double invariant_density_moment(int p, const QuadratureConfig& config = {});

struct ConstantsContinuous {
  double j0 = 0.0;
  double dj0 = 0.0;
  double lambda0 = 0.0;  ///< j0^2 / 2, principal Dirichlet eigenvalue of (1/2) Laplacian
  double C = 0.0;        ///< int over the disk of J0(j0 |x|)^2
  double m0 = 0.0;
  double m0_ratio = 0.0;
  double gamma0 = 0.0;
  double root_tolerance = 1e-13;
  QuadratureConfig quadrature;
};

ConstantsContinuous constants_continuous(const QuadratureConfig& config = {});

/// d/dr log J0(j0 r) = -j0 J1(j0 r) / J0(j0 r) for 0 <= r < 1, evaluated by
/// fixed-length Horner series (fast path for the disk diffusion).
class RadialLogGradient {
 public:
  explicit RadialLogGradient(double j0);
  double operator()(double r) const;
  /// J0(j0 r) by the same series.
  double phi(double r) const;
  /// (d/dr log J0(j0 r)) / r as a function of r^2; finite at r = 0.
  double over_r(double r_squared) const;

 private:
  double j0_;
  std::vector<double> c0_;  // J0 coefficients in (j0 r / 2)^2
  std::vector<double> c1_;  // J1(x) / (x / 2) coefficients
};

}  // namespace blt::bessel
