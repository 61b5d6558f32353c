// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
//
// blt command-line front end. One process runs one subcommand; the report is
// printed to stdout as JSON, and on failure an {"error": ...} record is
// printed instead and the exit status is the error code.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blt/blt.h"

using nlohmann::json;

namespace {

constexpr int kSchemaStatus = BLT_SCHEMA;

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

int print_error(const std::string& code, int status, const std::string& message) {
  const json record = {{"error", {{"code", code}, {"status", status}, {"message", message}, {"partial", nullptr}}}};
  std::cout << record.dump(2) << '\n';
  std::cerr << "blt: " << message << '\n';
  return status;
}

json convert(const std::string& key, const std::string& type, const std::vector<std::string>& raw) {
  const auto scalar = [&](const std::string& text) -> json {
    try {
      std::size_t used = 0;
      if (type == "integer" || type == "array of integers") {
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
      } else if (type == "number" || type == "array of numbers") {
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
      } else {
        return text;
      }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("value '" + text + "' for " + flag_name(key) + " is not a valid " + type);
  };
  if (type.rfind("array", 0) == 0) {
    json out = json::array();  // a bare list flag means an empty list
    for (const auto& item : raw) {
      if (!item.empty()) out.push_back(scalar(item));
    }
    return out;
  }
  if (raw.empty()) throw std::invalid_argument(flag_name(key) + " needs a value");
  return scalar(raw.front());
}

struct SubcommandFlags {
  CLI::App* app = nullptr;
  struct Value {
    json spec;
    std::unique_ptr<std::vector<std::string>> raw;
    CLI::Option* option = nullptr;
  };
  std::vector<Value> values;
};

std::string key_help(const json& spec) {
  std::string help = spec["help"].get<std::string>();
  if (!spec["default"].is_null()) help += " [default: " + spec["default"].dump() + "]";
  if (spec["required"].get<bool>()) help += " (required)";
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  const json schema = json::parse(blt_config_keys_json());

  CLI::App app{std::string("blt ") + blt_version() +
               ": exact enumeration, excursion sampling, Bessel numerics and conditioned diffusions"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string(blt_version()));

  std::string config_file;
  std::string output_dir;
  std::string cache_dir;
  int threads = 0;
  bool csv = false;
  bool no_cache = false;
  bool quiet = false;
  app.add_option("--config", config_file, "JSON config file; command-line flags override its keys");
  app.add_option("--output", output_dir, "write report.json (and CSV artifacts) into this directory");
  app.add_flag("--csv", csv, "also write the subcommand's CSV artifact (needs --output)");
  app.add_option("--threads", threads, "cap on worker threads")->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", cache_dir,
                 "table cache directory (default: $BLT_CACHE_DIR, $XDG_CACHE_HOME/blt, ~/.cache/blt)");
  app.add_flag("--no-cache", no_cache, "neither read nor write the table cache");
  app.add_flag("--quiet", quiet, "do not echo warnings to stderr (they stay in the report)");
  bool describe = false;
  app.add_flag("--describe-config", describe, "print every subcommand's config keys as JSON and exit");

  std::map<std::string, SubcommandFlags> subs;
  for (const auto& [name, info] : schema["subcommands"].items()) {
    std::string description = "run " + name;
    if (info["stochastic"].get<bool>()) description += " (stochastic: --seed required)";
    auto* sub = app.add_subcommand(name, description);
    sub->set_help_flag("--help", "print this help message and exit");
    const std::string columns = info["csv_columns"].get<std::string>();
    if (!columns.empty()) sub->footer("CSV columns (--csv): " + columns);
    SubcommandFlags flags;
    flags.app = sub;
    for (const auto& spec : info["keys"]) {
      auto raw = std::make_unique<std::vector<std::string>>();
      const std::string type = spec["type"].get<std::string>();
      auto* opt = sub->add_option(flag_name(spec["name"].get<std::string>()), *raw, key_help(spec));
      opt->type_name(type == "integer" ? "INT" : type == "number" ? "NUM" : type == "string" ? "TEXT" : "LIST");
      if (type.rfind("array", 0) == 0) {
        opt->delimiter(',')->expected(0, CLI::detail::expected_max_vector_size)->allow_extra_args(true);
      } else {
        opt->expected(1);
      }
      flags.values.push_back({spec, std::move(raw), opt});
    }
    subs.emplace(name, std::move(flags));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return print_error("schema", kSchemaStatus, e.what());
  }

  if (describe) {
    std::cout << schema.dump(2) << '\n';
    return 0;
  }
  if (app.get_subcommands().empty()) return print_error("schema", kSchemaStatus, "a subcommand is required");
  const std::string subcommand = app.get_subcommands().front()->get_name();
  json config = json::object();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) return print_error("io", BLT_IO, "cannot read config file " + config_file);
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      return print_error("schema", kSchemaStatus, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!config.is_object()) return print_error("schema", kSchemaStatus, "config file must hold a JSON object");
  }
  try {
    for (const auto& v : subs.at(subcommand).values) {
      if (v.option->count() > 0) {
        const std::string key = v.spec["name"].get<std::string>();
        config[key] = convert(key, v.spec["type"].get<std::string>(), *v.raw);
      }
    }
  } catch (const std::invalid_argument& e) {
    return print_error("schema", kSchemaStatus, e.what());
  }
  if (!output_dir.empty()) config["output_dir"] = output_dir;
  if (csv) config["csv"] = true;
  if (threads > 0) config["threads"] = threads;
  if (!cache_dir.empty()) config["cache_dir"] = cache_dir;
  if (no_cache) config["no_cache"] = true;

  blt_context* raw_ctx = nullptr;
  if (blt_context_create(&raw_ctx) != BLT_OK) return print_error("resource", BLT_RESOURCE, "cannot create context");
  std::unique_ptr<blt_context, decltype(&blt_context_destroy)> ctx(raw_ctx, &blt_context_destroy);
  if (quiet) blt_context_set_stderr_warnings(ctx.get(), 0);

  blt_report* raw_report = nullptr;
  const blt_status status = blt_run(ctx.get(), subcommand.c_str(), config.dump().c_str(), &raw_report);
  if (status != BLT_OK) {
    std::cout << json::parse(blt_last_error_json(ctx.get())).dump(2) << '\n';
    std::cerr << "blt: " << blt_status_name(status) << ": " << blt_last_error(ctx.get()) << '\n';
    return static_cast<int>(status);
  }
  std::unique_ptr<blt_report, decltype(&blt_report_destroy)> report(raw_report, &blt_report_destroy);
  std::cout << blt_report_json(report.get()) << '\n';
  return 0;
}
