// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace blt::lattice {

using BigInt = boost::multiprecision::cpp_int;

/// Exact nonnegative dyadic rational numerator / 2^exponent, kept in lowest
/// terms (odd numerator, or 0/2^0). Every path probability of a simple random
/// walk is of this form, so sums and products over enumerated paths stay exact.
class DyadicProb {
 public:
  DyadicProb() = default;
  DyadicProb(BigInt numerator, std::uint32_t exponent);

  static DyadicProb zero() { return {}; }
  static DyadicProb one() { return DyadicProb(1, 0); }
  /// 2^{-exponent}
  static DyadicProb inverse_power_of_two(std::uint32_t exponent) { return DyadicProb(1, exponent); }
  /// count / 2^exponent
  static DyadicProb from_count(std::uint64_t count, std::uint32_t exponent) {
    return DyadicProb(BigInt(count), exponent);
  }

  const BigInt& numerator() const { return numerator_; }
  std::uint32_t exponent() const { return exponent_; }
  bool is_zero() const { return numerator_ == 0; }

  DyadicProb& operator+=(const DyadicProb& other);
  DyadicProb& operator*=(const DyadicProb& other);
  /// Exact difference; throws DomainError if the result would be negative.
  DyadicProb& operator-=(const DyadicProb& other);
  /// Multiply by 2^k (k may be negative).
  DyadicProb scaled_by_power_of_two(int k) const;

  friend DyadicProb operator+(DyadicProb a, const DyadicProb& b) { return a += b; }
  friend DyadicProb operator*(DyadicProb a, const DyadicProb& b) { return a *= b; }
  friend DyadicProb operator-(DyadicProb a, const DyadicProb& b) { return a -= b; }

  friend bool operator==(const DyadicProb& a, const DyadicProb& b) {
    return a.exponent_ == b.exponent_ && a.numerator_ == b.numerator_;
  }
  friend std::strong_ordering operator<=>(const DyadicProb& a, const DyadicProb& b);

  double to_double() const;
  /// Natural logarithm, accurate even when the value underflows a double.
  double log() const;

  std::string numerator_string() const { return numerator_.str(); }
  /// "num/2^exp", or "0" / "1"
  std::string to_string() const;

 private:
  void normalize();

  BigInt numerator_ = 0;
  std::uint32_t exponent_ = 0;
};

/// Rigorous enclosure [lower, upper] of a probability.
struct ProbInterval {
  DyadicProb lower;
  DyadicProb upper;

  bool contains(const DyadicProb& p) const { return lower <= p && p <= upper; }
  double midpoint() const { return 0.5 * (lower.to_double() + upper.to_double()); }
  double width() const { return upper.to_double() - lower.to_double(); }
};

}  // namespace blt::lattice
