// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// On-disk cache of exact enumeration results. One JSON record per
// (L0, n, kind, config); the file name is the SHA-256 of that key and every
// record carries a hash of its own content, so a damaged or edited file is
// detected and treated as a miss.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "lattice/dyadic.hpp"

namespace blt::runner {

struct CacheKey {
  int L0 = 0;
  int n = 0;
  std::string kind;       ///< e.g. "b_plus", "irreducible", "b_lower", "b_upper"
  nlohmann::json config;  ///< truncation parameters the value depends on

  nlohmann::json to_json() const;
  std::string digest() const;
};

/// Cache directory from, in order: `explicit_dir`, $BLT_CACHE_DIR,
/// $XDG_CACHE_HOME/blt, $HOME/.cache/blt.
std::filesystem::path resolve_cache_dir(const std::string& explicit_dir);

class TableCache {
 public:
  /// A disabled cache never hits and never writes.
  TableCache() = default;
  explicit TableCache(std::filesystem::path dir);

  bool enabled() const { return enabled_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// nullopt on a miss. A record whose content hash or key does not match is
  /// reported with a warning and treated as a miss. Unreadable existing
  /// files raise IoError.
  std::optional<lattice::DyadicProb> lookup(const CacheKey& key) const;
  /// Writes atomically (temporary file + rename); IoError on failure.
  void store(const CacheKey& key, const lattice::DyadicProb& value) const;

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  bool enabled_ = false;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

}  // namespace blt::runner
