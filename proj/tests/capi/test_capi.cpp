// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through its C interface only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "blt/blt.h"

using nlohmann::json;

namespace {

struct Context {
  blt_context* ctx = nullptr;
  Context() {
    REQUIRE(blt_context_create(&ctx) == BLT_OK);
    blt_context_set_stderr_warnings(ctx, 0);
  }
  ~Context() { blt_context_destroy(ctx); }
};

json run_ok(blt_context* ctx, const char* sub, const json& cfg) {
  blt_report* report = nullptr;
  const auto status = blt_run(ctx, sub, cfg.dump().c_str(), &report);
  INFO(blt_last_error(ctx));
  REQUIRE(status == BLT_OK);
  REQUIRE(report != nullptr);
  json out = json::parse(blt_report_json(report));
  blt_report_destroy(report);
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("blt_capi_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(blt_version()) == "0.4.0");
  CHECK(std::string(blt_status_name(BLT_OK)) == "ok");
  CHECK(std::string(blt_status_name(BLT_TIMEOUT)) == "timeout");
  CHECK(std::string(blt_status_name(BLT_SCHEMA)) == "schema");
  CHECK(std::string(blt_status_name(static_cast<blt_status>(42))) == "unknown");
}

TEST_CASE("null handles are rejected") {
  CHECK(blt_context_create(nullptr) == BLT_INVALID_ARGUMENT);
  double x = 0.0;
  CHECK(blt_bessel_j0(nullptr, 1.0, &x) == BLT_INVALID_ARGUMENT);
  CHECK(std::string(blt_last_error(nullptr)).empty());
  CHECK(blt_report_csv_count(nullptr) == 0);
  CHECK(blt_report_csv_name(nullptr, 0) == nullptr);
  blt_report_destroy(nullptr);
  blt_context_destroy(nullptr);
}

TEST_CASE("direct numerics") {
  Context c;
  double j0 = 0.0, lo = 0.0, hi = 0.0;
  REQUIRE(blt_find_j0(c.ctx, &j0, &lo, &hi) == BLT_OK);
  CHECK(j0 == doctest::Approx(2.404825557695773).epsilon(1e-15));
  CHECK(lo <= j0);
  CHECK(j0 <= hi);
  double v = 1.0;
  REQUIRE(blt_bessel_j0(c.ctx, j0, &v) == BLT_OK);
  CHECK(std::abs(v) < 1e-12);
  REQUIRE(blt_bessel_j0(c.ctx, 0.0, &v) == BLT_OK);
  CHECK(v == 1.0);
  CHECK(blt_bessel_j0(c.ctx, 25.0, &v) == BLT_DOMAIN);
  CHECK(std::string(blt_last_error(c.ctx)).find("outside [0, 20]") != std::string::npos);
  const json rec = json::parse(blt_last_error_json(c.ctx));
  CHECK(rec["error"]["code"] == "domain");
  CHECK(rec["error"]["status"] == 2);
  double g = 0.0;
  REQUIRE(blt_gamma0(c.ctx, &g) == BLT_OK);
  CHECK(std::abs(g - 4.5860) < 5e-4);
  // success clears the previous failure
  CHECK(std::string(blt_last_error(c.ctx)).empty());
}

TEST_CASE("run reports and errors") {
  Context c;
  const json rep = run_ok(c.ctx, "gamma0", json::object());
  CHECK(rep["tool"] == "blt");
  CHECK(rep["subcommand"] == "gamma0");
  CHECK(rep["provenance"] == "computed");
  CHECK(std::abs(rep["results"]["gamma0"].get<double>() - 4.5860) < 5e-4);

  blt_report* report = nullptr;
  CHECK(blt_run(c.ctx, "speed", "{\"L0\": 2}", &report) == BLT_SCHEMA);
  CHECK(report == nullptr);
  CHECK(json::parse(blt_last_error_json(c.ctx))["error"]["message"].get<std::string>().find("seed") !=
        std::string::npos);
  CHECK(blt_run(c.ctx, "speed", "{\"seed\": 1, \"bogus\": 3}", &report) == BLT_SCHEMA);
  CHECK(blt_run(c.ctx, "speed", "not json", &report) == BLT_SCHEMA);
  CHECK(blt_run(c.ctx, "no-such-thing", "{}", &report) == BLT_SCHEMA);
  CHECK(blt_run(c.ctx, "gamma0", "{\"subcommand\": \"bessel\"}", &report) == BLT_SCHEMA);
  CHECK(blt_run(c.ctx, "enumerate", "{\"n_max\": -1}", &report) == BLT_SCHEMA);
  CHECK(blt_run(c.ctx, "enumerate", "{\"n_max\": 2.5}", &report) == BLT_SCHEMA);
  CHECK(blt_run(c.ctx, "gamma0", "{}", nullptr) == BLT_INVALID_ARGUMENT);
}

TEST_CASE("timeout carries partial counts") {
  Context c;
  blt_report* report = nullptr;
  const json cfg = {{"seed", 1}, {"r", 12}, {"num_accepted", 1000}, {"max_attempts", 100}, {"r_list", json::array()}};
  CHECK(blt_run(c.ctx, "reject-rw", cfg.dump().c_str(), &report) == BLT_TIMEOUT);
  const json rec = json::parse(blt_last_error_json(c.ctx));
  CHECK(rec["error"]["code"] == "timeout");
  CHECK(rec["error"]["partial"]["attempts"].get<long>() >= 100);
  CHECK(rec["error"]["partial"]["accepted"].get<long>() < 1000);
}

TEST_CASE("csv artifacts and output directory") {
  Context c;
  const auto dir = temp_dir("csv");
  blt_report* report = nullptr;
  const json cfg = {{"seed", 5}, {"num_excursions", 20}, {"csv", true}, {"output_dir", dir.string()}};
  REQUIRE(blt_run(c.ctx, "sample-q", cfg.dump().c_str(), &report) == BLT_OK);
  REQUIRE(blt_report_csv_count(report) == 1);
  CHECK(std::string(blt_report_csv_name(report, 0)) == "sample_q.csv");
  const std::string content = blt_report_csv_content(report, 0);
  CHECK(content.rfind("j,nu_j,sigma_j\n", 0) == 0);
  CHECK(blt_report_csv_name(report, 1) == nullptr);
  blt_report_destroy(report);
  CHECK(std::filesystem::exists(dir / "sample_q.csv"));
  CHECK(std::filesystem::exists(dir / "report.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("context defaults feed the config") {
  Context c;
  const auto dir = temp_dir("cache");
  REQUIRE(blt_context_set_cache_dir(c.ctx, dir.string().c_str()) == BLT_OK);
  REQUIRE(blt_context_set_threads(c.ctx, 2) == BLT_OK);
  CHECK(blt_context_set_threads(c.ctx, 0) == BLT_INVALID_ARGUMENT);
  const json first = run_ok(c.ctx, "renewal-check", {{"n_max", 6}});
  CHECK(first["config"]["threads"] == 2);
  CHECK(first["config"]["cache_dir"] == dir.string());
  CHECK(first["provenance"] == "computed");
  const json second = run_ok(c.ctx, "renewal-check", {{"n_max", 6}});
  CHECK(second["provenance"] == "cached");
  CHECK(second["results"] == first["results"]);
  CHECK(second["input_hash"] == first["input_hash"]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("stochastic runs are reproducible and thread independent") {
  Context c;
  const json cfg = {{"seed", 7}, {"num_excursions", 20000}, {"num_replicas", 4}};
  const json a = run_ok(c.ctx, "speed", cfg);
  const json b = run_ok(c.ctx, "speed", cfg);
  json threaded = cfg;
  threaded["threads"] = 3;
  const json t = run_ok(c.ctx, "speed", threaded);
  CHECK(a["results"] == b["results"]);
  CHECK(a["results"] == t["results"]);
  CHECK(a["input_hash"] == t["input_hash"]);
  json other = cfg;
  other["seed"] = 8;
  const json d = run_ok(c.ctx, "speed", other);
  CHECK(d["results"] != a["results"]);
  CHECK(d["input_hash"] != a["input_hash"]);
}

TEST_CASE("config key description") {
  const json keys = json::parse(blt_config_keys_json());
  CHECK(keys["subcommands"].size() == 13);
  CHECK(keys["subcommands"]["speed"]["stochastic"] == true);
  CHECK(keys["subcommands"]["enumerate"]["stochastic"] == false);
  CHECK(keys["subcommands"]["sde-ergodic"]["csv_columns"] == "t,value");
}
