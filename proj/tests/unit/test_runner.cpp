// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "common/error.hpp"
#include "common/log.hpp"
#include "runner/cache.hpp"
#include "runner/config.hpp"
#include "runner/hash.hpp"
#include "runner/runner.hpp"

using namespace blt;
using namespace blt::runner;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("blt_unit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("config defaults and validation") {
  const auto cfg = RunConfig::from_json({{"subcommand", "enumerate"}, {"n_max", 6}});
  CHECK(cfg.int32("L0") == 2);
  CHECK(cfg.int32("n_max") == 6);
  CHECK(cfg.int32("threads") == 1);
  CHECK_FALSE(cfg.has("max_len"));
  CHECK_FALSE(is_stochastic("enumerate"));
  CHECK(is_stochastic("ray-knight"));

  CHECK_THROWS_AS(RunConfig::from_json(json::array()), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"L0", 2}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "nope"}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "enumerate"}, {"seed", 1}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "enumerate"}, {"L0", "2"}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "enumerate"}, {"L0", 0}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "speed"}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "speed"}, {"seed", -1}}), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "feller"}, {"seed", 1}, {"delta_list", {0.2, -0.5}}}),
                  SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json({{"subcommand", "gamma0"}, {"csv", true}}), SchemaError);
  CHECK_NOTHROW(RunConfig::from_json({{"subcommand", "speed"}, {"seed", 0}}));
  CHECK_NOTHROW(RunConfig::from_json({{"subcommand", "ray-knight"}, {"seed", 3}, {"window_low", -1.0}}));
}

TEST_CASE("input hash ignores execution keys and key order") {
  const auto a = RunConfig::from_json(json::parse(R"({"subcommand": "speed", "seed": 4, "m_max": 12})"));
  const auto b = RunConfig::from_json(json::parse(
      R"({"m_max": 12, "threads": 3, "output_dir": "/tmp/x", "no_cache": true, "seed": 4, "subcommand": "speed"})"));
  const auto c = RunConfig::from_json(json::parse(R"({"subcommand": "speed", "seed": 5, "m_max": 12})"));
  CHECK(a.input_hash() == b.input_hash());
  CHECK(a.input_hash() != c.input_hash());
  CHECK(a.input_hash().size() == 64);
  // explicit defaults hash like omitted ones
  const auto d = RunConfig::from_json(json::parse(R"({"subcommand": "speed", "seed": 4, "m_max": 12, "L0": 2})"));
  CHECK(a.input_hash() == d.input_hash());
}

TEST_CASE("table cache round trip and corruption") {
  log::WarningCapture warnings;
  const auto dir = scratch("cache");
  TableCache cache(dir);
  const CacheKey key{2, 5, "B+", json::object()};
  const auto value = lattice::DyadicProb::from_count(29, 9);
  CHECK_FALSE(cache.lookup(key).has_value());
  cache.store(key, value);
  REQUIRE(cache.lookup(key).has_value());
  CHECK(*cache.lookup(key) == value);
  CHECK_FALSE(cache.lookup({3, 5, "B+", json::object()}).has_value());
  CHECK_FALSE(cache.lookup({2, 5, "B_lower", {{"max_len", 48}, {"max_depth", 16}}}).has_value());
  CHECK(warnings.messages().empty());

  // a record copied under another key's name is rejected
  const CacheKey other{2, 6, "B+", json::object()};
  fs::copy_file(dir / (key.digest() + ".json"), dir / (other.digest() + ".json"));
  CHECK_FALSE(cache.lookup(other).has_value());
  REQUIRE(warnings.messages().size() == 1);
  CHECK(warnings.messages()[0].find("key mismatch") != std::string::npos);

  // edited numerator
  {
    const auto file = dir / (key.digest() + ".json");
    std::ifstream in(file);
    json record = json::parse(in);
    record["numerator"] = "31";
    std::ofstream(file) << record.dump();
  }
  CHECK_FALSE(cache.lookup(key).has_value());
  CHECK(warnings.messages().back().find("content hash mismatch") != std::string::npos);
  cache.store(key, value);
  CHECK(*cache.lookup(key) == value);

  TableCache disabled;
  CHECK_FALSE(disabled.enabled());
  disabled.store(key, value);
  CHECK_FALSE(disabled.lookup(key).has_value());
  fs::remove_all(dir);
}

TEST_CASE("cache directory resolution and write failures") {
  CHECK(resolve_cache_dir("/some/where") == fs::path("/some/where"));
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  CHECK_THROWS_AS(TableCache(dir / "file" / "sub"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("error records") {
  const auto timeout = error_record(std::make_exception_ptr(TimeoutError("slow", 3, 100)));
  CHECK(timeout["error"]["code"] == "timeout");
  CHECK(timeout["error"]["status"] == 4);
  CHECK(timeout["error"]["partial"]["accepted"] == 3);
  CHECK(timeout["error"]["partial"]["attempts"] == 100);
  const auto other = error_record(std::make_exception_ptr(std::runtime_error("boom")));
  CHECK(other["error"]["code"] == "internal");
  CHECK(other["error"]["partial"].is_null());
  CHECK(error_status(std::make_exception_ptr(SchemaError("x"))) == 8);
}

TEST_CASE("runner renewal report through a fresh cache") {
  const auto dir = scratch("runner");
  const json cfg = {{"subcommand", "renewal-check"}, {"n_max", 5}, {"cache_dir", dir.string()}};
  const auto first = run(cfg);
  const auto second = run(cfg);
  CHECK(first.report["provenance"] == "computed");
  CHECK(second.report["provenance"] == "cached");
  CHECK(first.report["results"] == second.report["results"]);
  CHECK(first.report["results"]["all_pass"] == true);
  CHECK(first.report["results"]["rows"][2]["lhs"]["exact"] == "5/2^5");
  fs::remove_all(dir);
}
