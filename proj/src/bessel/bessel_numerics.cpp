// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "bessel/bessel_numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "common/error.hpp"
#include "common/numeric.hpp"

namespace blt::bessel {

namespace {

// sum_k (-1)^k (x/2)^{2k + order} / (k! (k + order)!) in type T.
template <typename T>
T bessel_series(T x, int order) {
  using std::abs;
  const T q = x * x / 4;
  T term = order == 0 ? T(1) : x / 2;
  CompensatedSum<T> sum;
  sum += term;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (T(k) * T(k + order));
    sum += term;
    if (term == 0 || (T(k) > q && abs(term) < T(1e-18) * abs(sum.value()))) break;
  }
  return sum.value();
}

using Wide = boost::multiprecision::cpp_bin_float_50;

double series(double x, int order) {
  if (!(x >= 0.0 && x <= kSeriesWindow)) {
    throw DomainError("Bessel series evaluated outside [0, 20]: x = " + std::to_string(x));
  }
  // Past x = 8 the alternating terms exceed 1e3 and long double cancellation
  // would cost the 1e-12 target.
  if (x > 8.0) return static_cast<double>(bessel_series<Wide>(Wide(x), order));
  return static_cast<double>(bessel_series<long double>(static_cast<long double>(x), order));
}

}  // namespace

double bessel_j0(double x) { return series(x, 0); }
double bessel_j1(double x) { return series(x, 1); }

J0Root find_j0() {
  double lo = 2.0;
  double hi = 3.0;
  if (!(bessel_j0(lo) > 0.0 && bessel_j0(hi) < 0.0)) throw ContractViolation("J0 does not change sign on [2, 3]");
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j0(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  J0Root root;
  root.lo = lo;
  root.hi = hi;
  root.j0 = 0.5 * (lo + hi);
  root.dj0 = -bessel_j1(root.j0);
  return root;
}

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
  if (max_subdivisions < 1) throw InvalidArgument("max_subdivisions must be >= 1");
}

namespace {

struct Rule {
  std::array<double, 8> kx{};  // Kronrod nodes, kx[0] = 0
  std::array<double, 8> kw{};
  std::array<double, 8> gw{};  // Gauss weight at the matching Kronrod node, or 0

  Rule() {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& kxs = gauss_kronrod<double, 15>::abscissa();
    const auto& kws = gauss_kronrod<double, 15>::weights();
    const auto& gxs = gauss<double, 7>::abscissa();
    const auto& gws = gauss<double, 7>::weights();
    for (std::size_t i = 0; i < 8; ++i) {
      kx[i] = kxs[i];
      kw[i] = kws[i];
      for (std::size_t j = 0; j < gxs.size(); ++j) {
        if (std::abs(gxs[j] - kxs[i]) < 1e-14) gw[i] = gws[j];
      }
    }
  }
};

const Rule& rule() {
  static const Rule r;
  return r;
}

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

Piece apply_rule(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double kronrod = 0.0;
  double gauss = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    double fx = f(centre + half * r.kx[i]);
    if (i > 0) fx += f(centre - half * r.kx[i]);
    if (!std::isfinite(fx)) throw DomainError("integrand is not finite on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    kronrod += r.kw[i] * fx;
    gauss += r.gw[i] * fx;
  }
  return {a, b, kronrod * half, std::abs(kronrod - gauss) * half};
}

}  // namespace

QuadratureResult integrate_detailed(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureConfig& config) {
  config.validate();
  if (!(a <= b)) throw InvalidArgument("integrate requires a <= b");
  QuadratureResult result;
  if (a == b) return result;
  std::priority_queue<Piece> pieces;
  pieces.push(apply_rule(f, a, b));
  double value = pieces.top().value;
  double error = pieces.top().error;
  const auto floor = [&] { return 50.0 * std::numeric_limits<double>::epsilon() * std::abs(value); };
  while (error > std::max(config.abs_tol, floor())) {
    if (result.subdivisions >= config.max_subdivisions) {
      throw ConvergenceError("quadrature did not reach tolerance " + std::to_string(config.abs_tol) + " within " +
                             std::to_string(config.max_subdivisions) + " subdivisions (estimate " +
                             std::to_string(error) + ")");
    }
    const Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Piece left = apply_rule(f, worst.a, mid);
    const Piece right = apply_rule(f, mid, worst.b);
    pieces.push(left);
    pieces.push(right);
    ++result.subdivisions;
    // re-sum to keep the running totals free of drift
    CompensatedSum<double> v;
    CompensatedSum<double> e;
    auto copy = pieces;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    value = v.value();
    error = e.value();
  }
  result.value = value;
  result.error_estimate = error;
  return result;
}

double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureConfig& config) {
  return integrate_detailed(f, a, b, config).value;
}

namespace {

double moment_integral(double power, double z, const QuadratureConfig& config) {
  return integrate(
      [power](double x) {
        const double j = bessel_j0(x);
        return std::pow(x, power) * j * j;
      },
      0.0, z, config);
}

}  // namespace

double schafheitlin_residual(double mu, double z, const QuadratureConfig& config) {
  if (!(mu >= 0.0)) throw InvalidArgument("schafheitlin_residual requires mu >= 0");
  if (!(z > 0.0 && z <= kSeriesWindow)) throw InvalidArgument("schafheitlin_residual requires 0 < z <= 20");
  const double lhs = (mu + 2.0) * moment_integral(mu + 2.0, z, config);
  const auto bracket = [mu](double x) {
    if (x == 0.0) return 0.0;
    const double j = bessel_j0(x);
    const double dj = -bessel_j1(x);
    const double a = x * dj - 0.5 * (mu + 1.0) * j;
    const double p = std::pow(x, mu + 1.0);
    return p * a * a + p * (x * x + 0.25 * (mu + 1.0) * (mu + 1.0)) * j * j;
  };
  // the x = 0 endpoint contributes nothing for mu >= 0
  const double tiny = bracket(1e-12);
  if (!(std::abs(tiny) < 1e-10)) throw ContractViolation("Schafheitlin boundary term does not vanish at 0");
  const double rhs = -0.25 * std::pow(mu + 1.0, 3) * moment_integral(mu, z, config) + 0.5 * (bracket(z) - bracket(0.0));
  return std::abs(lhs - rhs);
}

double orthogonality_residual(const QuadratureConfig& config) {
  const J0Root root = find_j0();
  const double integral = moment_integral(1.0, root.j0, config);
  return std::abs(integral - 0.5 * root.j0 * root.j0 * root.dj0 * root.dj0);
}

M0Values compute_m0(const QuadratureConfig& config) {
  const J0Root root = find_j0();
  const double j0 = root.j0;
  M0Values out;
  out.ratio = moment_integral(3.0, j0, config) / moment_integral(1.0, j0, config) / (j0 * j0);
  out.closed = (1.0 - 2.0 / (j0 * j0)) / 3.0;
  if (std::abs(out.ratio - out.closed) > 1e-8) {
    throw ConvergenceError("m0 quadrature ratio " + std::to_string(out.ratio) + " disagrees with the closed form " +
                           std::to_string(out.closed));
  }
  return out;
}

double compute_gamma0() {
  const double j0 = find_j0().j0;
  return 3.0 / (1.0 - 2.0 / (j0 * j0));
}

double invariant_density_moment(int p, const QuadratureConfig& config) {
  if (p < 0 || p > 8) throw InvalidArgument("invariant_density_moment supports 0 <= p <= 8");
  const double j0 = find_j0().j0;
  const auto radial = [j0](double power) {
    return [j0, power](double r) {
      const double j = bessel_j0(j0 * r);
      return std::pow(r, power) * j * j;
    };
  };
  return integrate(radial(p + 1.0), 0.0, 1.0, config) / integrate(radial(1.0), 0.0, 1.0, config);
}

ConstantsContinuous constants_continuous(const QuadratureConfig& config) {
  const J0Root root = find_j0();
  ConstantsContinuous out;
  out.j0 = root.j0;
  out.dj0 = root.dj0;
  out.lambda0 = 0.5 * root.j0 * root.j0;
  const double j0 = root.j0;
  out.C = 2.0 * std::numbers::pi * integrate(
                                        [j0](double r) {
                                          const double j = bessel_j0(j0 * r);
                                          return r * j * j;
                                        },
                                        0.0, 1.0, config);
  const M0Values m0 = compute_m0(config);
  out.m0 = m0.closed;
  out.m0_ratio = m0.ratio;
  out.gamma0 = 3.0 / (1.0 - 2.0 / (j0 * j0));
  out.quadrature = config;
  return out;
}

RadialLogGradient::RadialLogGradient(double j0) : j0_(j0) {
  // (x/2)^2 <= 1.5 on [0, j0]; 18 terms put the truncation below 1e-25
  double a0 = 1.0;
  double a1 = 1.0;
  for (int k = 0; k < 18; ++k) {
    c0_.push_back(a0);
    c1_.push_back(a1);
    a0 *= -1.0 / ((k + 1.0) * (k + 1.0));
    a1 *= -1.0 / ((k + 1.0) * (k + 2.0));
  }
}

double RadialLogGradient::phi(double r) const {
  const double y = 0.25 * j0_ * j0_ * r * r;
  double s = 0.0;
  for (auto it = c0_.rbegin(); it != c0_.rend(); ++it) s = s * y + *it;
  return s;
}

double RadialLogGradient::over_r(double r_squared) const {
  const double y = 0.25 * j0_ * j0_ * r_squared;
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t k = c0_.size(); k-- > 0;) {
    s0 = s0 * y + c0_[k];
    s1 = s1 * y + c1_[k];
  }
  return -0.5 * j0_ * j0_ * s1 / s0;
}

double RadialLogGradient::operator()(double r) const {
  const double y = 0.25 * j0_ * j0_ * r * r;
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t k = c0_.size(); k-- > 0;) {
    s0 = s0 * y + c0_[k];
    s1 = s1 * y + c1_[k];
  }
  // J1(x) = (x / 2) s1 with x = j0 r
  return -j0_ * (0.5 * j0_ * r * s1) / s0;
}

}  // namespace blt::bessel
