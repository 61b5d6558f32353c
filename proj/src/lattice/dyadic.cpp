// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "lattice/dyadic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "common/error.hpp"

namespace blt::lattice {

DyadicProb::DyadicProb(BigInt numerator, std::uint32_t exponent)
    : numerator_(std::move(numerator)), exponent_(exponent) {
  if (numerator_ < 0) throw DomainError("DyadicProb: negative numerator");
  normalize();
}

void DyadicProb::normalize() {
  if (numerator_ == 0) {
    exponent_ = 0;
    return;
  }
  const auto low = boost::multiprecision::lsb(numerator_);
  const auto shift = static_cast<std::uint32_t>(std::min<std::size_t>(low, exponent_));
  if (shift > 0) {
    numerator_ >>= shift;
    exponent_ -= shift;
  }
}

DyadicProb& DyadicProb::operator+=(const DyadicProb& other) {
  if (other.exponent_ > exponent_) {
    numerator_ <<= (other.exponent_ - exponent_);
    exponent_ = other.exponent_;
    numerator_ += other.numerator_;
  } else {
    numerator_ += other.numerator_ << (exponent_ - other.exponent_);
  }
  normalize();
  return *this;
}

DyadicProb& DyadicProb::operator-=(const DyadicProb& other) {
  BigInt rhs = other.numerator_;
  if (other.exponent_ > exponent_) {
    numerator_ <<= (other.exponent_ - exponent_);
    exponent_ = other.exponent_;
  } else {
    rhs <<= (exponent_ - other.exponent_);
  }
  if (rhs > numerator_) throw DomainError("DyadicProb: subtraction would go negative");
  numerator_ -= rhs;
  normalize();
  return *this;
}

DyadicProb& DyadicProb::operator*=(const DyadicProb& other) {
  numerator_ *= other.numerator_;
  exponent_ += other.exponent_;
  normalize();
  return *this;
}

DyadicProb DyadicProb::scaled_by_power_of_two(int k) const {
  if (is_zero()) return {};
  if (k >= 0) {
    const auto up = static_cast<std::uint32_t>(k);
    if (up <= exponent_) return DyadicProb(numerator_, exponent_ - up);
    return DyadicProb(numerator_ << (up - exponent_), 0);
  }
  return DyadicProb(numerator_, exponent_ + static_cast<std::uint32_t>(-k));
}

std::strong_ordering operator<=>(const DyadicProb& a, const DyadicProb& b) {
  if (a.exponent_ == b.exponent_) return a.numerator_.compare(b.numerator_) <=> 0;
  if (a.exponent_ > b.exponent_) {
    const BigInt rhs = b.numerator_ << (a.exponent_ - b.exponent_);
    return a.numerator_.compare(rhs) <=> 0;
  }
  const BigInt lhs = a.numerator_ << (b.exponent_ - a.exponent_);
  return lhs.compare(b.numerator_) <=> 0;
}

namespace {

// numerator = top * 2^shift with top < 2^63
std::pair<std::uint64_t, long> split_top_bits(const BigInt& value) {
  const auto bits = static_cast<long>(boost::multiprecision::msb(value)) + 1;
  const long shift = bits > 63 ? bits - 63 : 0;
  const BigInt top = value >> shift;
  return {top.convert_to<std::uint64_t>(), shift};
}

}  // namespace

double DyadicProb::to_double() const {
  if (is_zero()) return 0.0;
  const auto [top, shift] = split_top_bits(numerator_);
  return std::ldexp(static_cast<double>(top), static_cast<int>(shift - static_cast<long>(exponent_)));
}

double DyadicProb::log() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  const auto [top, shift] = split_top_bits(numerator_);
  return std::log(static_cast<double>(top)) +
         static_cast<double>(shift - static_cast<long>(exponent_)) * std::numbers::ln2;
}

std::string DyadicProb::to_string() const {
  if (exponent_ == 0) return numerator_.str();
  return numerator_.str() + "/2^" + std::to_string(exponent_);
}

}  // namespace blt::lattice
