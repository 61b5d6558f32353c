// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace blt::runner {

enum class KeyType { integer, real, boolean, string, integer_list, real_list, string_list };

struct KeySpec {
  std::string name;
  KeyType type = KeyType::integer;
  nlohmann::json default_value;  ///< null: no default
  bool positive = false;         ///< numbers (and list members) must be > 0
  bool required = false;
  std::string help;
};

/// Keys accepted by every subcommand: subcommand, output_dir, csv, threads,
/// cache_dir, no_cache.
const std::vector<KeySpec>& common_keys();
/// Subcommand-specific keys; SchemaError for an unknown subcommand.
const std::vector<KeySpec>& subcommand_keys(const std::string& subcommand);
const std::vector<std::string>& subcommand_names();
bool is_stochastic(const std::string& subcommand);
/// CSV columns written by the subcommand, empty when it writes none.
std::string csv_columns(const std::string& subcommand);

/// {"common": [...], "subcommands": {name: {"stochastic", "csv_columns",
/// "keys": [...]}}} with each key as {name, type, default, positive,
/// required, help}.
nlohmann::json describe_keys();

/// Keys that never affect results and are left out of the input hash.
const std::vector<std::string>& execution_keys();

/// Validated configuration with every default filled in.
class RunConfig {
 public:
  /// SchemaError on an unknown subcommand, unknown key, wrong type, missing
  /// seed for a stochastic subcommand, or a nonpositive value where one is
  /// required.
  static RunConfig from_json(const nlohmann::json& raw);

  const std::string& subcommand() const { return subcommand_; }
  const nlohmann::json& values() const { return values_; }
  bool has(const std::string& key) const;

  std::int64_t integer(const std::string& key) const;
  int int32(const std::string& key) const;
  std::uint64_t uint64(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::string string(const std::string& key) const;
  std::vector<int> integer_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  std::vector<std::string> string_list(const std::string& key) const;

  /// Resolved config without execution keys, serialized canonically.
  std::string canonical() const;
  /// SHA-256 over "blob <size>\0<canonical>".
  std::string input_hash() const;

 private:
  const nlohmann::json& at(const std::string& key) const;

  std::string subcommand_;
  nlohmann::json values_;
};

}  // namespace blt::runner
