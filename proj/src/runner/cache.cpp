// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "runner/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

#include "common/error.hpp"
#include "common/log.hpp"
#include "runner/hash.hpp"

namespace blt::runner {

namespace fs = std::filesystem;
using nlohmann::json;

json CacheKey::to_json() const { return {{"L0", L0}, {"n", n}, {"kind", kind}, {"config", config}}; }

std::string CacheKey::digest() const { return sha256_hex(to_json().dump()); }

fs::path resolve_cache_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("BLT_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') return fs::path(xdg) / "blt";
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') return fs::path(home) / ".cache" / "blt";
  throw IoError("no cache directory: set BLT_CACHE_DIR or HOME");
}

TableCache::TableCache(fs::path dir) : dir_(std::move(dir)), enabled_(true) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

namespace {

json record_body(const CacheKey& key, const lattice::DyadicProb& value) {
  json body = key.to_json();
  body["numerator"] = value.numerator_string();
  body["exponent"] = value.exponent();
  return body;
}

}  // namespace

std::optional<lattice::DyadicProb> TableCache::lookup(const CacheKey& key) const {
  if (!enabled_) return std::nullopt;
  const fs::path file = dir_ / (key.digest() + ".json");
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    ++misses_;
    return std::nullopt;
  }
  std::ifstream in(file);
  if (!in) throw IoError("cannot read cache record " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto reject = [&](const std::string& why) -> std::optional<lattice::DyadicProb> {
    log::warn("cache record " + file.string() + " rejected (" + why + "); recomputing");
    ++misses_;
    return std::nullopt;
  };
  json record;
  try {
    record = json::parse(buffer.str());
  } catch (const json::exception&) {
    return reject("not valid JSON");
  }
  if (!record.is_object() || !record.contains("content_hash") || !record["content_hash"].is_string()) {
    return reject("missing content hash");
  }
  const std::string stored = record["content_hash"].get<std::string>();
  json body = record;
  body.erase("content_hash");
  if (sha256_hex(body.dump()) != stored) return reject("content hash mismatch");
  try {
    if (body.at("L0") != key.L0 || body.at("n") != key.n || body.at("kind") != key.kind ||
        body.at("config") != key.config) {
      return reject("key mismatch");
    }
    const lattice::DyadicProb value(lattice::BigInt(body.at("numerator").get<std::string>()),
                                    body.at("exponent").get<std::uint32_t>());
    ++hits_;
    return value;
  } catch (const std::exception&) {
    return reject("malformed fields");
  }
}

void TableCache::store(const CacheKey& key, const lattice::DyadicProb& value) const {
  if (!enabled_) return;
  json record = record_body(key, value);
  record["content_hash"] = sha256_hex(record.dump());
  const std::string name = key.digest();
  const fs::path tmp = dir_ / (name + ".tmp");
  const fs::path file = dir_ / (name + ".json");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write cache record " + tmp.string());
    out << record.dump(2) << '\n';
    if (!out) throw IoError("write failed for cache record " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw IoError("cannot move cache record into place: " + ec.message());
}

}  // namespace blt::runner
