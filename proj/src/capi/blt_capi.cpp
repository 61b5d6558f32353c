// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include "blt/blt.h"

#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "bessel/bessel_numerics.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "runner/runner.hpp"

struct blt_context {
  int threads = 0;  // 0: leave to the config
  std::string cache_dir;
  std::string last_error;
  std::string last_error_json;
};

struct blt_report {
  std::string json;
  std::vector<blt::runner::CsvArtifact> csv;
};

namespace {

blt_status fail(blt_context* ctx, const std::exception_ptr& failure) {
  const auto record = blt::runner::error_record(failure);
  if (ctx != nullptr) {
    ctx->last_error = record["error"]["message"].get<std::string>();
    ctx->last_error_json = record.dump();
  }
  return static_cast<blt_status>(record["error"]["status"].get<int>());
}

template <typename Fn>
blt_status guarded(blt_context* ctx, Fn&& fn) {
  if (ctx == nullptr) return BLT_INVALID_ARGUMENT;
  ctx->last_error.clear();
  ctx->last_error_json.clear();
  try {
    fn();
    return BLT_OK;
  } catch (...) {
    return fail(ctx, std::current_exception());
  }
}

}  // namespace

extern "C" {

const char* blt_version(void) { return blt::runner::kToolVersion; }

const char* blt_status_name(blt_status status) {
  if (status == BLT_OK) return "ok";
  if (status < BLT_INVALID_ARGUMENT || status > BLT_INTERNAL) return "unknown";
  return blt::error_code_name(static_cast<blt::ErrorCode>(status));
}

const char* blt_config_keys_json(void) {
  static const std::string text = blt::runner::describe_keys().dump();
  return text.c_str();
}

blt_status blt_context_create(blt_context** out) {
  if (out == nullptr) return BLT_INVALID_ARGUMENT;
  try {
    *out = new blt_context();
    return BLT_OK;
  } catch (...) {
    *out = nullptr;
    return BLT_RESOURCE;
  }
}

void blt_context_destroy(blt_context* ctx) { delete ctx; }

blt_status blt_context_set_threads(blt_context* ctx, int threads) {
  return guarded(ctx, [&] {
    if (threads < 1) throw blt::InvalidArgument("threads must be >= 1");
    ctx->threads = threads;
  });
}

blt_status blt_context_set_cache_dir(blt_context* ctx, const char* dir) {
  return guarded(ctx, [&] { ctx->cache_dir = dir == nullptr ? "" : dir; });
}

blt_status blt_context_set_stderr_warnings(blt_context* ctx, int enabled) {
  return guarded(ctx, [&] { blt::log::set_stderr_enabled(enabled != 0); });
}

const char* blt_last_error(const blt_context* ctx) { return ctx == nullptr ? "" : ctx->last_error.c_str(); }

const char* blt_last_error_json(const blt_context* ctx) {
  return ctx == nullptr ? "" : ctx->last_error_json.c_str();
}

blt_status blt_run(blt_context* ctx, const char* subcommand, const char* config_json, blt_report** out) {
  if (out != nullptr) *out = nullptr;
  return guarded(ctx, [&] {
    if (subcommand == nullptr || out == nullptr) throw blt::InvalidArgument("blt_run: null argument");
    nlohmann::json raw = nlohmann::json::object();
    if (config_json != nullptr && *config_json != '\0') {
      try {
        raw = nlohmann::json::parse(config_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw blt::SchemaError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (!raw.is_object()) throw blt::SchemaError("config must be a JSON object");
    if (raw.contains("subcommand") && raw["subcommand"] != subcommand) {
      throw blt::SchemaError("config subcommand does not match '" + std::string(subcommand) + "'");
    }
    raw["subcommand"] = subcommand;
    if (ctx->threads > 0 && !raw.contains("threads")) raw["threads"] = ctx->threads;
    if (!ctx->cache_dir.empty() && !raw.contains("cache_dir")) raw["cache_dir"] = ctx->cache_dir;
    auto result = blt::runner::run(raw);
    auto* report = new blt_report();
    report->json = result.report.dump(2);
    report->csv = std::move(result.csv);
    *out = report;
  });
}

void blt_report_destroy(blt_report* report) { delete report; }

const char* blt_report_json(const blt_report* report) { return report == nullptr ? "" : report->json.c_str(); }

size_t blt_report_csv_count(const blt_report* report) { return report == nullptr ? 0 : report->csv.size(); }

const char* blt_report_csv_name(const blt_report* report, size_t index) {
  if (report == nullptr || index >= report->csv.size()) return nullptr;
  return report->csv[index].name.c_str();
}

const char* blt_report_csv_content(const blt_report* report, size_t index) {
  if (report == nullptr || index >= report->csv.size()) return nullptr;
  return report->csv[index].content.c_str();
}

blt_status blt_bessel_j0(blt_context* ctx, double x, double* out) {
  return guarded(ctx, [&] {
    if (out == nullptr) throw blt::InvalidArgument("blt_bessel_j0: null output");
    *out = blt::bessel::bessel_j0(x);
  });
}

blt_status blt_find_j0(blt_context* ctx, double* j0, double* lo, double* hi) {
  return guarded(ctx, [&] {
    if (j0 == nullptr) throw blt::InvalidArgument("blt_find_j0: null output");
    const auto root = blt::bessel::find_j0();
    *j0 = root.j0;
    if (lo != nullptr) *lo = root.lo;
    if (hi != nullptr) *hi = root.hi;
  });
}

blt_status blt_gamma0(blt_context* ctx, double* out) {
  return guarded(ctx, [&] {
    if (out == nullptr) throw blt::InvalidArgument("blt_gamma0: null output");
    *out = blt::bessel::compute_gamma0();
  });
}

}  // extern "C"
