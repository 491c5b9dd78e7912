/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trivid/scenario.hpp"

namespace trivid::cli {

enum class FieldType {
  kBool,
  kInt,
  kUint,
  kDouble,
  kString,
  kArray,
  kObject
};

struct Schema;

// One config key. For arrays, `element` gives the element type and `child`
// the element schema when elements are objects; for objects, `child` is the
// nested schema. Bounds apply to numeric values (and numeric elements).
struct FieldSpec {
  std::string name;
  FieldType type = FieldType::kString;
  bool required = false;
  std::string description;
  double min_value = -1e308;
  double max_value = 1e308;
  bool exclusive_max = false;
  FieldType element = FieldType::kObject;
  const Schema* child = nullptr;
};

struct Schema {
  std::string title;
  std::vector<FieldSpec> fields;
};

// Rejects unknown keys, missing required keys, type and range violations.
void validate_config(const Json& config, const Schema& schema);

// Human-readable key listing used as each subcommand's help footer. The
// schema is the single source of truth: every accepted key appears here.
std::string schema_help(const Schema& schema);

const Schema& synth_schema();
const Schema& saliency_schema();
const Schema& temporal_schema();
const Schema& prune_schema();
const Schema& simulate_schema();
const Schema& report_schema();
const Schema& sweep_schema();
const Schema* find_schema(const std::string& command);

struct CliOptions {
  std::filesystem::path out_dir = ".";
  std::optional<uint64_t> seed;  // overrides the config seed
  bool quiet = false;
};

// Reads and parses a config file. A missing file is an I/O error; malformed
// JSON is a config error.
Json load_config(const std::filesystem::path& path);

void cmd_synth(const Json& config, const CliOptions& options);
void cmd_saliency(const Json& config, const CliOptions& options);
void cmd_temporal(const Json& config, const CliOptions& options);
void cmd_prune(const Json& config, const CliOptions& options);
void cmd_simulate(const Json& config, const CliOptions& options);
void cmd_report(const Json& config, const CliOptions& options);
void cmd_sweep(const Json& config, const CliOptions& options);

// Validates against the command's schema and dispatches.
void run_command(const std::string& command, const Json& config,
                 const CliOptions& options);

// Exit code contract: config errors 2, I/O errors 3, any other failure 4.
int exit_code_for(const std::exception& e);

// Worker cap for fan-out commands: hardware concurrency, clamped by the
// TRIVID_THREADS environment variable and the job count.
size_t worker_count(size_t jobs);

// Runs fn(0..n-1) across worker_count(n) threads; rethrows the first
// worker exception. Job order is unspecified, so fn must write results
// into per-index slots.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace trivid::cli
