/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <atomic>
#include <cstdlib>
#include <numeric>

#include "doctest.h"
#include "test_helpers.hpp"
#include "trivid/archive.hpp"
#include "trivid/cli.hpp"
#include "trivid/error.hpp"

using namespace trivid;
using namespace trivid::cli;

namespace {

// Collects every key name reachable from a schema, child schemas included.
void collect_names(const Schema& schema, std::vector<std::string>& out) {
  for (const FieldSpec& f : schema.fields) {
    out.push_back(f.name);
    if (f.child != nullptr) collect_names(*f.child, out);
  }
}

struct EnvGuard {
  std::string name;
  std::optional<std::string> old;
  EnvGuard(const std::string& n, const std::string& value) : name(n) {
    const char* prev = std::getenv(n.c_str());
    if (prev != nullptr) old = prev;
    setenv(n.c_str(), value.c_str(), 1);
  }
  ~EnvGuard() {
    if (old.has_value()) {
      setenv(name.c_str(), old->c_str(), 1);
    } else {
      unsetenv(name.c_str());
    }
  }
};

}  // namespace

TEST_CASE("config validation rejects unknown and ill-typed keys") {
  const Schema& schema = synth_schema();

  Json good;
  good["scenarios"] = 2;
  good["seed"] = 7;
  CHECK_NOTHROW(validate_config(good, schema));

  Json unknown = good;
  unknown["scnarios"] = 2;
  CHECK_THROWS_WITH_AS(validate_config(unknown, schema),
                       doctest::Contains("scnarios"), ConfigError);

  Json nested = good;
  nested["spec"]["width"] = 320;
  CHECK_NOTHROW(validate_config(nested, schema));
  nested["spec"]["witdh"] = 320;
  CHECK_THROWS_WITH_AS(validate_config(nested, schema),
                       doctest::Contains("spec.witdh"), ConfigError);

  Json wrong_type = good;
  wrong_type["scenarios"] = "many";
  CHECK_THROWS_AS(validate_config(wrong_type, schema), ConfigError);

  Json negative = good;
  negative["scenarios"] = -1;
  CHECK_THROWS_AS(validate_config(negative, schema), ConfigError);

  Json fractional = good;
  fractional["scenarios"] = 2.5;
  CHECK_THROWS_AS(validate_config(fractional, schema), ConfigError);

  CHECK_THROWS_AS(validate_config(Json::array(), schema), ConfigError);
}

TEST_CASE("required keys and ranges are enforced") {
  const Schema& schema = report_schema();
  Json config;
  config["baselines"] = Json::array();
  CHECK_THROWS_WITH_AS(validate_config(config, schema),
                       doctest::Contains("ours"), ConfigError);

  config["ours"]["method"] = "trivid";
  config["ours"]["latency_ms"] = 44.4;
  config["ours"]["power_w"] = 50.8;
  CHECK_NOTHROW(validate_config(config, schema));

  // frame_drop_ratio lives in [0, 1).
  config["ours"]["frame_drop_ratio"] = 1.0;
  CHECK_THROWS_AS(validate_config(config, schema), ConfigError);
  config["ours"]["frame_drop_ratio"] = 0.4;
  CHECK_NOTHROW(validate_config(config, schema));

  // Array elements validate against the element schema.
  Json row;
  row["method"] = "gpu";
  row["latency_ms"] = 60.9;
  row["power_w"] = 296.0;
  row["bogus"] = 1;
  config["baselines"].push_back(row);
  CHECK_THROWS_WITH_AS(validate_config(config, schema),
                       doctest::Contains("bogus"), ConfigError);
}

TEST_CASE("every command schema documents all of its keys") {
  for (const std::string name :
       {"synth", "saliency", "temporal", "prune", "simulate", "report",
        "sweep"}) {
    const Schema* schema = find_schema(name);
    REQUIRE(schema != nullptr);
    std::string help = schema_help(*schema);
    std::vector<std::string> names;
    collect_names(*schema, names);
    CHECK(!names.empty());
    for (const std::string& key : names) {
      INFO(name << " help is missing " << key);
      CHECK(help.find(key) != std::string::npos);
    }
  }
  CHECK(find_schema("bogus") == nullptr);
}

TEST_CASE("config loading distinguishes io from parse failures") {
  auto dir = testutil::scratch_dir("cli_load");
  CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
  testutil::write_file(dir / "broken.json", "{ not json");
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
  testutil::write_file(dir / "ok.json", "{\"scenarios\": 3}");
  Json j = load_config(dir / "ok.json");
  CHECK(j["scenarios"] == 3);
}

TEST_CASE("exit codes map the error taxonomy") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(IoError("x")) == 3);
  CHECK(exit_code_for(FormatError("x")) == 4);
  CHECK(exit_code_for(ContractError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 4);
}

TEST_CASE("worker count respects the thread cap variable") {
  {
    // The variable is a cap on hardware concurrency, never a floor.
    EnvGuard guard("TRIVID_THREADS", "2");
    CHECK(worker_count(8) <= 2);
    CHECK(worker_count(1) == 1);
  }
  {
    EnvGuard guard("TRIVID_THREADS", "1");
    CHECK(worker_count(8) == 1);
  }
  {
    EnvGuard guard("TRIVID_THREADS", "banana");
    CHECK_THROWS_AS(worker_count(8), ConfigError);
  }
  {
    EnvGuard guard("TRIVID_THREADS", "0");
    CHECK_THROWS_AS(worker_count(8), ConfigError);
  }
  CHECK(worker_count(0) >= 1);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<int> hits(101, 0);
  parallel_for(hits.size(), [&](size_t i) { hits[i] = 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 101);

  std::atomic<int> ran{0};
  auto boom = [&](size_t i) {
    ++ran;
    if (i == 3) throw FormatError("boom");
  };
  CHECK_THROWS_AS(parallel_for(8, boom), FormatError);
  CHECK(ran.load() >= 1);
}

TEST_CASE("zero-ratio pruning emits a passthrough mask") {
  auto dir = testutil::scratch_dir("cli_prune0");
  Json config;
  config["synth"]["tensors"] = 2;
  config["synth"]["c_out"] = 4;
  config["synth"]["c_in"] = 2;
  config["synth"]["k"] = 3;
  config["ratio"] = 0.0;
  CliOptions options;
  options.out_dir = dir;
  options.quiet = true;
  run_command("prune", config, options);

  CHECK(testutil::read_file(dir / "stats.csv") ==
        "pruning_ratio,sparse_kernel_ratio\n0,0\n");
  CHECK(!std::filesystem::exists(dir / "library.json"));
  PruneMask mask = load_mask(dir / "mask.trim");
  CHECK(mask.total_kept() == mask.total_size());
}

TEST_CASE("report command writes the comparison tables") {
  auto dir = testutil::scratch_dir("cli_report");
  Json config;
  config["ours"] = {{"method", "trivid"},
                    {"data_reduction", "frame+patch"},
                    {"pruning", "pattern"},
                    {"latency_ms", 44.4},
                    {"frame_drop_ratio", 0.4},
                    {"power_w", 50.8}};
  config["baselines"] = Json::array();
  config["baselines"].push_back({{"method", "gpu"},
                                 {"latency_ms", 60.9},
                                 {"power_w", 296.0},
                                 {"efr_fps", 22.5}});
  CliOptions options;
  options.out_dir = dir;
  options.quiet = true;
  run_command("report", config, options);

  auto report = testutil::read_csv(dir / "report.csv");
  REQUIRE(report.size() == 3);
  CHECK(report[0] == std::vector<std::string>{
                         "method", "data_reduction", "pruning", "latency_ms",
                         "efr_fps", "power_w", "energy_j_per_frame"});
  CHECK(report[1][0] == "trivid");
  CHECK(report[1][3] == "44.4");
  CHECK(report[2][4] == "22.5");

  auto ratios = testutil::read_csv(dir / "ratios.csv");
  REQUIRE(ratios.size() == 2);
  CHECK(ratios[1][0] == "gpu");
  CHECK(ratios[1][1] == "1.37");
}

TEST_CASE("commands rerun byte-identically") {
  auto dir_a = testutil::scratch_dir("cli_rerun_a");
  auto dir_b = testutil::scratch_dir("cli_rerun_b");
  Json config;
  config["scenarios"] = 2;
  config["seed"] = 11;
  config["spec"] = {{"width", 96}, {"height", 64}, {"frames", 6}};
  config["render"] = false;
  CliOptions options;
  options.quiet = true;
  options.out_dir = dir_a;
  run_command("synth", config, options);
  options.out_dir = dir_b;
  run_command("synth", config, options);
  auto a = testutil::snapshot_dir(dir_a);
  CHECK(!a.empty());
  CHECK(a == testutil::snapshot_dir(dir_b));
}

TEST_CASE("the cli binary maps failures to exit codes") {
  auto dir = testutil::scratch_dir("cli_exit");
  testutil::write_file(dir / "good.json", "{\"scenarios\": 1, \"seed\": 3,"
                                          " \"render\": false,"
                                          " \"spec\": {\"width\": 64,"
                                          " \"height\": 48, \"frames\": 4}}");
  testutil::write_file(dir / "unknown.json", "{\"scnarios\": 1}");

  std::string out = " --out " + (dir / "out").string() + " --quiet";
  CHECK(testutil::run_cli("synth --config " + (dir / "good.json").string() +
                          out) == 0);
  CHECK(testutil::run_cli("synth --config " + (dir / "unknown.json").string() +
                          out) == 2);
  CHECK(testutil::run_cli("synth --config " + (dir / "nope.json").string() +
                          out) == 3);
}

TEST_CASE("seed flag overrides the config seed") {
  auto base = testutil::scratch_dir("cli_seed");
  Json config;
  config["scenarios"] = 1;
  config["seed"] = 5;
  config["render"] = false;
  config["spec"] = {{"width", 64}, {"height", 48}, {"frames", 4}};

  CliOptions options;
  options.quiet = true;
  options.out_dir = base / "config_seed";
  run_command("synth", config, options);

  options.out_dir = base / "flag_seed";
  options.seed = 9;
  run_command("synth", config, options);

  Json flag_seed = config;
  flag_seed["seed"] = 9;
  options.seed.reset();
  options.out_dir = base / "explicit";
  run_command("synth", flag_seed, options);

  CHECK(testutil::snapshot_dir(base / "flag_seed") ==
        testutil::snapshot_dir(base / "explicit"));
  CHECK(testutil::snapshot_dir(base / "flag_seed") !=
        testutil::snapshot_dir(base / "config_seed"));
}
