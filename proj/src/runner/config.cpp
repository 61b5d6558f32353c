// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "runner/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "common/error.hpp"
#include "runner/hash.hpp"

namespace blt::runner {

using nlohmann::json;

namespace {

KeySpec key(std::string name, KeyType type, json def, bool positive, std::string help) {
  return {std::move(name), type, std::move(def), positive, false, std::move(help)};
}

KeySpec seed_key() {
  KeySpec k{"seed", KeyType::integer, nullptr, false, true, "master seed"};
  return k;
}

KeySpec L0_key() { return key("L0", KeyType::integer, 2, true, "local-time cap"); }
KeySpec budget_key() { return key("node_budget", KeyType::integer, 1'000'000'000, true, "DFS node budget"); }
KeySpec c4_key() {
  return key("c4", KeyType::real, nullptr, true, "excursion weight exponent (default: log(4(sqrt2-1)) for L0=2, else truncated root)");
}

const std::map<std::string, std::vector<KeySpec>>& tables() {
  static const std::map<std::string, std::vector<KeySpec>> t = {
      {"enumerate",
       {L0_key(), key("n_max", KeyType::integer, 10, true, "largest level n"),
        key("max_len", KeyType::integer, nullptr, true, "path length cap for B_n (default 48 for L0=2, 36 for L0=3, 28 above)"),
        key("max_depth", KeyType::integer, 16, true, "depth cap below 0 for B_n"), budget_key()}},
      {"renewal-check", {L0_key(), key("n_max", KeyType::integer, 10, true, "largest level n"), budget_key()}},
      {"constants",
       {L0_key(), key("n_max", KeyType::integer, 12, true, "largest level n"),
        key("max_len", KeyType::integer, nullptr, true, "path length cap for B_n (default 48 for L0=2, 36 for L0=3, 28 above)"),
        key("max_depth", KeyType::integer, 16, true, "depth cap below 0 for B_n"), budget_key()}},
      {"sample-q",
       {L0_key(), c4_key(), key("m_max", KeyType::integer, 18, true, "excursion length cap"),
        key("num_excursions", KeyType::integer, 1000, true, "excursions per path"), seed_key()}},
      {"speed",
       {L0_key(), c4_key(), key("m_max", KeyType::integer, 18, true, "excursion length cap"),
        key("num_excursions", KeyType::integer, 100'000, true, "total excursions"),
        key("num_replicas", KeyType::integer, 8, true, "independent streams"), seed_key()}},
      {"reject-rw",
       {L0_key(), key("r", KeyType::integer, 1, true, "target level"),
        key("num_accepted", KeyType::integer, 1000, true, "accepted paths per run"),
        key("max_attempts", KeyType::integer, 2'000'000'000, true, "attempt cap"),
        key("cylinders", KeyType::string_list, json::array({"+", "++", "+-+"}), false,
            "cylinder prefixes as +/- strings"),
        key("r_list", KeyType::integer_list, json::array({6, 8, 10}), true, "levels for cylinder diagnostics"),
        key("m_max", KeyType::integer, 18, true, "excursion length cap for Q values"), c4_key(), seed_key()}},
      {"bessel",
       {key("quad_tol", KeyType::real, 1e-12, true, "absolute quadrature tolerance"),
        key("max_subdivisions", KeyType::integer, 4000, true, "quadrature subdivision cap")}},
      {"gamma0", {}},
      {"sde-ergodic",
       {key("T", KeyType::real, 1000.0, true, "horizon per replica"), key("dt", KeyType::real, 1e-4, true, "time step"),
        key("num_replicas", KeyType::integer, 1, true, "independent replicas"),
        key("density_bins", KeyType::integer, 20, true, "bins of the radial density test"),
        key("r0", KeyType::real, 0.5, true, "initial radius"), seed_key()}},
      {"ray-knight",
       {key("a", KeyType::real, 2.0, true, "target level"), key("dt", KeyType::real, 2.5e-5, true, "time step"),
        key("h", KeyType::real, 0.05, true, "bin width"), key("num_paths", KeyType::integer, 10'000, true, "paths"),
        key("window_low", KeyType::real, -0.5, false, "lowest simulated level"), seed_key()}},
      {"dominance",
       {key("f", KeyType::string, "", false, "upper barrier: number or inf (empty: standard three-case suite)"),
        key("g", KeyType::string, "", false, "lower barrier: number or inf"),
        key("T", KeyType::real, 2.0, true, "horizon"), key("y0", KeyType::real, 0.1, true, "start"),
        key("dt", KeyType::real, 0.01, true, "time step"),
        key("num_accepted", KeyType::integer, 300, true, "accepted paths per barrier"),
        key("alpha", KeyType::real, 0.01, true, "significance level"), seed_key()}},
      {"reject-bm",
       {key("a_list", KeyType::real_list, json::array({1.0, 2.0, 3.0}), true, "target levels"),
        key("dt", KeyType::real, 1e-3, true, "time step"),
        key("h", KeyType::real, nullptr, true, "bin width (default 10 sqrt(dt))"),
        key("num_accepted", KeyType::integer, 200, true, "accepted paths per level"),
        key("max_attempts", KeyType::integer, 200'000'000, true, "attempt cap per level"), seed_key()}},
      {"feller",
       {key("y0", KeyType::real, 1.0, true, "start"), key("dt", KeyType::real, 1e-4, true, "time step"),
        key("num_paths", KeyType::integer, 10'000, true, "paths per experiment"),
        key("z_grid", KeyType::real_list, json::array({0.0, 0.5, 1.0, 2.0, 5.0, 10.0}), false, "area tail grid"),
        key("delta_list", KeyType::real_list, json::array({0.2, 0.5}), true, "sup test offsets delta"),
        key("times", KeyType::real_list, json::array({0.5, 1.0, 2.0}), true, "martingale check times"),
        key("T_max", KeyType::real, 1000.0, true, "absorption horizon"), seed_key()}},
  };
  return t;
}

const KeySpec* find_spec(const std::vector<KeySpec>& specs, const std::string& name) {
  for (const auto& s : specs) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string type_name(KeyType type) {
  switch (type) {
    case KeyType::integer: return "integer";
    case KeyType::real: return "number";
    case KeyType::boolean: return "boolean";
    case KeyType::string: return "string";
    case KeyType::integer_list: return "array of integers";
    case KeyType::real_list: return "array of numbers";
    case KeyType::string_list: return "array of strings";
  }
  return "?";
}

bool matches_type(const json& v, KeyType type) {
  const auto all = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
  switch (type) {
    case KeyType::integer: return v.is_number_integer();
    case KeyType::real: return v.is_number() && std::isfinite(v.get<double>());
    case KeyType::boolean: return v.is_boolean();
    case KeyType::string: return v.is_string();
    case KeyType::integer_list: return all([](const json& e) { return e.is_number_integer(); });
    case KeyType::real_list:
      return all([](const json& e) { return e.is_number() && std::isfinite(e.get<double>()); });
    case KeyType::string_list: return all([](const json& e) { return e.is_string(); });
  }
  return false;
}

bool is_positive(const json& v) {
  if (v.is_array()) return std::all_of(v.begin(), v.end(), is_positive);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>() > 0;
  if (v.is_number()) return v.get<double>() > 0.0;
  return true;
}

}  // namespace

const std::vector<KeySpec>& common_keys() {
  static const std::vector<KeySpec> keys = {
      {"subcommand", KeyType::string, nullptr, false, true, "subcommand name"},
      key("output_dir", KeyType::string, "", false, "directory for report.json and CSV artifacts"),
      key("csv", KeyType::boolean, false, false, "write CSV artifacts (needs output_dir)"),
      key("threads", KeyType::integer, 1, true, "worker cap"),
      key("cache_dir", KeyType::string, "", false, "table cache directory"),
      key("no_cache", KeyType::boolean, false, false, "bypass the table cache"),
  };
  return keys;
}

const std::vector<KeySpec>& subcommand_keys(const std::string& subcommand) {
  const auto& t = tables();
  const auto it = t.find(subcommand);
  if (it == t.end()) throw SchemaError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"enumerate", "renewal-check", "constants",   "sample-q",
                                                 "speed",     "reject-rw",     "bessel",      "gamma0",
                                                 "sde-ergodic", "ray-knight",  "dominance",   "reject-bm",
                                                 "feller"};
  return names;
}

bool is_stochastic(const std::string& subcommand) {
  const auto& keys = subcommand_keys(subcommand);
  return find_spec(keys, "seed") != nullptr;
}

std::string csv_columns(const std::string& subcommand) {
  if (subcommand == "sample-q") return "j,nu_j,sigma_j";
  if (subcommand == "sde-ergodic") return "t,value";
  return {};
}

namespace {

nlohmann::json describe(const std::vector<KeySpec>& specs) {
  json out = json::array();
  for (const auto& s : specs) {
    out.push_back({{"name", s.name}, {"type", type_name(s.type)}, {"default", s.default_value},
                   {"positive", s.positive}, {"required", s.required}, {"help", s.help}});
  }
  return out;
}

}  // namespace

json describe_keys() {
  json subs = json::object();
  for (const auto& name : subcommand_names()) {
    subs[name] = {{"stochastic", is_stochastic(name)}, {"csv_columns", csv_columns(name)},
                  {"keys", describe(subcommand_keys(name))}};
  }
  return {{"common", describe(common_keys())}, {"subcommands", subs}};
}

const std::vector<std::string>& execution_keys() {
  static const std::vector<std::string> keys = {"output_dir", "threads", "cache_dir", "no_cache", "csv"};
  return keys;
}

RunConfig RunConfig::from_json(const json& raw) {
  if (!raw.is_object()) throw SchemaError("config must be a JSON object");
  if (!raw.contains("subcommand") || !raw["subcommand"].is_string()) {
    throw SchemaError("config needs a string 'subcommand'");
  }
  RunConfig cfg;
  cfg.subcommand_ = raw["subcommand"].get<std::string>();
  const auto& specific = subcommand_keys(cfg.subcommand_);
  const auto& common = common_keys();

  for (const auto& [name, value] : raw.items()) {
    const KeySpec* spec = find_spec(specific, name);
    if (spec == nullptr) spec = find_spec(common, name);
    if (spec == nullptr) throw SchemaError("unknown key '" + name + "' for subcommand " + cfg.subcommand_);
    if (value.is_null() && !spec->required) continue;
    if (!matches_type(value, spec->type)) throw SchemaError("key '" + name + "' must be " + type_name(spec->type));
    if (spec->positive && !is_positive(value)) throw SchemaError("key '" + name + "' must be positive");
    if (name == "seed" && value.get<std::int64_t>() < 0 && !value.is_number_unsigned()) {
      throw SchemaError("seed must be nonnegative");
    }
    cfg.values_[name] = value;
  }
  for (const auto* list : {&common, &specific}) {
    for (const auto& spec : *list) {
      if (cfg.values_.contains(spec.name)) continue;
      if (spec.required) {
        throw SchemaError("missing required key '" + spec.name + "' for subcommand " + cfg.subcommand_);
      }
      if (!spec.default_value.is_null()) cfg.values_[spec.name] = spec.default_value;
    }
  }
  if (cfg.boolean("csv") && cfg.string("output_dir").empty()) {
    throw SchemaError("csv output needs output_dir");
  }
  return cfg;
}

bool RunConfig::has(const std::string& key) const { return values_.contains(key) && !values_[key].is_null(); }

const json& RunConfig::at(const std::string& key) const {
  if (!has(key)) throw InvalidArgument("config key '" + key + "' is not set");
  return values_[key];
}

std::int64_t RunConfig::integer(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw SchemaError("key '" + key + "' is out of range");
  }
  return v.get<std::int64_t>();
}

int RunConfig::int32(const std::string& key) const {
  const std::int64_t v = integer(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw SchemaError("key '" + key + "' is out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t RunConfig::uint64(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t s = v.get<std::int64_t>();
  if (s < 0) throw SchemaError("key '" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

double RunConfig::real(const std::string& key) const { return at(key).get<double>(); }
bool RunConfig::boolean(const std::string& key) const { return at(key).get<bool>(); }
std::string RunConfig::string(const std::string& key) const { return at(key).get<std::string>(); }

std::vector<int> RunConfig::integer_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& e : at(key)) {
    const auto v = e.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw SchemaError("key '" + key + "' has an out-of-range entry");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> RunConfig::real_list(const std::string& key) const { return at(key).get<std::vector<double>>(); }

std::vector<std::string> RunConfig::string_list(const std::string& key) const {
  return at(key).get<std::vector<std::string>>();
}

std::string RunConfig::canonical() const {
  json copy = values_;
  for (const auto& k : execution_keys()) copy.erase(k);
  return copy.dump();  // object keys are sorted
}

std::string RunConfig::input_hash() const {
  const std::string body = canonical();
  std::string framed = "blob " + std::to_string(body.size());
  framed.push_back('\0');
  framed += body;
  return sha256_hex(framed);
}

}  // namespace blt::runner
