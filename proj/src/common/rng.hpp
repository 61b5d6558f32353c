// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace blt {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the `stream`-th independent stream under a master seed. Streams
/// are indexed by a counter so results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t stream) {
  return Engine(derive_seed(master, stream));
}

/// Standard normal variates (ziggurat).
class NormalSource {
 public:
  explicit NormalSource(Engine& engine) : engine_(engine) {}
  double operator()() { return dist_(engine_); }

 private:
  Engine& engine_;
  boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

/// Uniform on [0, 1).
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Hands out fair ±1 coin flips 64 at a time.
class CoinSource {
 public:
  explicit CoinSource(Engine& engine) : engine_(engine) {}
  int operator()() {
    if (left_ == 0) {
      bits_ = engine_();
      left_ = 64;
    }
    const int step = (bits_ & 1U) ? 1 : -1;
    bits_ >>= 1;
    --left_;
    return step;
  }

 private:
  Engine& engine_;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

}  // namespace blt
