/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <cmath>
#include <sstream>

#include "trivid/cli.hpp"
#include "trivid/error.hpp"

namespace trivid::cli {

namespace {

const char* type_name(FieldType t) {
  switch (t) {
    case FieldType::kBool:
      return "bool";
    case FieldType::kInt:
      return "int";
    case FieldType::kUint:
      return "uint";
    case FieldType::kDouble:
      return "number";
    case FieldType::kString:
      return "string";
    case FieldType::kArray:
      return "array";
    case FieldType::kObject:
      return "object";
  }
  return "?";
}

void check_scalar(const Json& value, const FieldSpec& field, FieldType type,
                  const std::string& where) {
  switch (type) {
    case FieldType::kBool:
      if (!value.is_boolean()) {
        throw ConfigError(where + " must be a bool");
      }
      return;
    case FieldType::kInt:
      if (!value.is_number_integer() && !value.is_number_unsigned()) {
        throw ConfigError(where + " must be an integer");
      }
      break;
    case FieldType::kUint:
      if (!(value.is_number_unsigned() ||
            (value.is_number_integer() && value.get<int64_t>() >= 0))) {
        throw ConfigError(where + " must be a non-negative integer");
      }
      break;
    case FieldType::kDouble:
      if (!value.is_number()) {
        throw ConfigError(where + " must be a number");
      }
      break;
    case FieldType::kString:
      if (!value.is_string()) {
        throw ConfigError(where + " must be a string");
      }
      return;
    default:
      throw ConfigError(where + " has an unsupported element type");
  }
  double v = value.get<double>();
  if (v < field.min_value || v > field.max_value ||
      (field.exclusive_max && v == field.max_value)) {
    std::ostringstream msg;
    msg << where << " must lie in [" << field.min_value << ", "
        << field.max_value << (field.exclusive_max ? ")" : "]");
    throw ConfigError(msg.str());
  }
}

void validate_node(const Json& config, const Schema& schema,
                   const std::string& prefix) {
  if (!config.is_object()) {
    throw ConfigError(prefix.empty() ? "config must be a JSON object"
                                     : prefix + " must be a JSON object");
  }
  for (const auto& [key, value] : config.items()) {
    const FieldSpec* field = nullptr;
    for (const FieldSpec& f : schema.fields) {
      if (f.name == key) {
        field = &f;
        break;
      }
    }
    std::string where = prefix.empty() ? key : prefix + "." + key;
    if (field == nullptr) {
      throw ConfigError("unknown config key: " + where);
    }
    switch (field->type) {
      case FieldType::kObject:
        if (!value.is_object()) {
          throw ConfigError(where + " must be an object");
        }
        if (field->child != nullptr) {
          validate_node(value, *field->child, where);
        }
        break;
      case FieldType::kArray: {
        if (!value.is_array()) {
          throw ConfigError(where + " must be an array");
        }
        size_t i = 0;
        for (const auto& item : value) {
          std::string slot = where + "[" + std::to_string(i) + "]";
          if (field->element == FieldType::kObject) {
            if (!item.is_object()) {
              throw ConfigError(slot + " must be an object");
            }
            if (field->child != nullptr) {
              validate_node(item, *field->child, slot);
            }
          } else {
            check_scalar(item, *field, field->element, slot);
          }
          ++i;
        }
        break;
      }
      default:
        check_scalar(value, *field, field->type, where);
        break;
    }
  }
  for (const FieldSpec& f : schema.fields) {
    if (f.required && !config.contains(f.name)) {
      std::string where = prefix.empty() ? f.name : prefix + "." + f.name;
      throw ConfigError("missing required config key: " + where);
    }
  }
}

void append_help(std::ostringstream& out, const Schema& schema, int indent) {
  for (const FieldSpec& f : schema.fields) {
    out << std::string(static_cast<size_t>(indent), ' ') << f.name << " ("
        << type_name(f.type);
    if (f.type == FieldType::kArray) {
      out << " of " << type_name(f.element);
    }
    if (f.required) out << ", required";
    out << ")";
    if (!f.description.empty()) out << ": " << f.description;
    out << "\n";
    if (f.child != nullptr) {
      append_help(out, *f.child, indent + 2);
    }
  }
}

FieldSpec field(std::string name, FieldType type, bool required,
                std::string description) {
  FieldSpec f;
  f.name = std::move(name);
  f.type = type;
  f.required = required;
  f.description = std::move(description);
  return f;
}

FieldSpec num_field(std::string name, FieldType type, bool required,
                    std::string description, double min_value,
                    double max_value, bool exclusive_max = false) {
  FieldSpec f = field(std::move(name), type, required, std::move(description));
  f.min_value = min_value;
  f.max_value = max_value;
  f.exclusive_max = exclusive_max;
  return f;
}

FieldSpec obj_field(std::string name, bool required, std::string description,
                    const Schema* child) {
  FieldSpec f =
      field(std::move(name), FieldType::kObject, required,
            std::move(description));
  f.child = child;
  return f;
}

FieldSpec arr_field(std::string name, bool required, std::string description,
                    FieldType element, const Schema* child = nullptr,
                    double min_value = -1e308, double max_value = 1e308,
                    bool exclusive_max = false) {
  FieldSpec f =
      field(std::move(name), FieldType::kArray, required,
            std::move(description));
  f.element = element;
  f.child = child;
  f.min_value = min_value;
  f.max_value = max_value;
  f.exclusive_max = exclusive_max;
  return f;
}

const Schema& scenario_spec_schema() {
  static const Schema schema{
      "scenario spec",
      {
          num_field("width", FieldType::kInt, false, "frame width, pixels",
                    16, 8192),
          num_field("height", FieldType::kInt, false, "frame height, pixels",
                    16, 8192),
          num_field("frames", FieldType::kInt, false, "sequence length", 1,
                    100000),
          num_field("objects", FieldType::kInt, false, "object count", 1,
                    256),
          field("motion", FieldType::kString, false,
                "\"wander\" or \"crossing\""),
          num_field("min_size", FieldType::kDouble, false,
                    "smallest box side, pixels", 1, 8192),
          num_field("max_size", FieldType::kDouble, false,
                    "largest box side, pixels", 1, 8192),
          num_field("min_speed", FieldType::kDouble, false,
                    "slowest speed, pixels/frame", 0, 1024),
          num_field("max_speed", FieldType::kDouble, false,
                    "fastest speed, pixels/frame", 0, 1024),
          num_field("jitter_sigma", FieldType::kDouble, false,
                    "detection center noise, pixels", 0, 1024),
          num_field("miss_prob", FieldType::kDouble, false,
                    "detection miss probability", 0, 1, true),
          num_field("fps", FieldType::kDouble, false, "frames per second",
                    1e-6, 100000),
      }};
  return schema;
}

const Schema& layer_schema() {
  static const Schema schema{
      "layer",
      {
          field("name", FieldType::kString, true, "unique layer name"),
          field("kind", FieldType::kString, false, "\"conv\" or \"fixed\""),
          num_field("c_in", FieldType::kInt, false, "input channels", 1,
                    1 << 20),
          num_field("c_out", FieldType::kInt, false, "output channels", 1,
                    1 << 20),
          num_field("k", FieldType::kInt, false, "kernel size", 1, 31),
          num_field("stride", FieldType::kInt, false, "stride", 1, 64),
          num_field("padding", FieldType::kInt, false, "padding", 0, 64),
          num_field("h", FieldType::kInt, false, "input height", 1, 1 << 20),
          num_field("w", FieldType::kInt, false, "input width", 1, 1 << 20),
          num_field("gops", FieldType::kDouble, false,
                    "fixed layers: workload in GOPs", 0, 1e9),
          num_field("cycles", FieldType::kUint, false,
                    "fixed layers: cycle cost", 0, 1e18),
          num_field("dram_bytes", FieldType::kUint, false,
                    "fixed layers: DRAM traffic", 0, 1e18),
      }};
  return schema;
}

const Schema& device_schema() {
  static const Schema schema{
      "device",
      {
          field("name", FieldType::kString, false, "device label"),
          num_field("clock_hz", FieldType::kDouble, false, "core clock",
                    1.0, 1e12),
          num_field("dsp_count", FieldType::kInt, false, "DSP slices", 1,
                    1 << 26),
          num_field("peak_gops", FieldType::kDouble, false,
                    "peak throughput, GOP/s", 1e-9, 1e9),
          num_field("e_mac_j", FieldType::kDouble, false, "energy per MAC",
                    0, 1),
          num_field("e_dram_byte_j", FieldType::kDouble, false,
                    "energy per DRAM byte", 0, 1),
          num_field("board_power_w", FieldType::kDouble, false,
                    "measured board power, watts", 0, 1e6),
          num_field("filters_in_parallel", FieldType::kInt, false,
                    "filters computed per pass", 1, 1 << 20),
      }};
  return schema;
}

const Schema& stage_schema() {
  static const Schema schema{
      "stage",
      {
          field("name", FieldType::kString, true, "stage label"),
          obj_field("device", false, "device spec", &device_schema()),
          field("table", FieldType::kString, false,
                "path to a layer table JSON (or give \"layers\")"),
          arr_field("layers", false, "inline layer table",
                    FieldType::kObject, &layer_schema()),
          num_field("tiles_emitted", FieldType::kInt, false,
                    "tiles handed downstream per frame", 1, 1 << 20),
      }};
  return schema;
}

const Schema& report_row_schema() {
  static const Schema schema{
      "report row",
      {
          field("method", FieldType::kString, true, "row label"),
          field("data_reduction", FieldType::kString, false,
                "data reduction description"),
          field("pruning", FieldType::kString, false, "pruning description"),
          num_field("latency_ms", FieldType::kDouble, true,
                    "per-frame latency, ms", 1e-9, 1e12),
          num_field("frame_drop_ratio", FieldType::kDouble, false,
                    "fraction of frames dropped", 0, 1, true),
          num_field("power_w", FieldType::kDouble, true, "board power, watts",
                    1e-9, 1e9),
          num_field("efr_fps", FieldType::kDouble, false,
                    "measured effective frame rate override", 1e-9, 1e9),
      }};
  return schema;
}

const Schema& tile_schema() {
  static const Schema schema{
      "tile",
      {
          num_field("t_h", FieldType::kInt, false, "tile rows", 1, 1 << 20),
          num_field("t_w", FieldType::kInt, false, "tile cols", 1, 1 << 20),
          num_field("t_c", FieldType::kInt, false,
                    "channels per load (0 = all)", 0, 1 << 20),
      }};
  return schema;
}

const Schema& prune_synth_schema() {
  static const Schema schema{
      "synthetic weights",
      {
          num_field("tensors", FieldType::kInt, false, "tensor count", 1,
                    4096),
          num_field("c_out", FieldType::kInt, false, "filters per tensor", 1,
                    4096),
          num_field("c_in", FieldType::kInt, false, "channels per tensor", 1,
                    4096),
          num_field("k", FieldType::kInt, false, "kernel size (odd)", 1, 15),
          num_field("seed", FieldType::kUint, false, "weight RNG seed", 0,
                    1.8446744073709552e19),
      }};
  return schema;
}

const Schema& saliency_layer_schema() {
  static const Schema schema{
      "layer dims",
      {
          field("name", FieldType::kString, true, "layer name"),
          num_field("h", FieldType::kInt, true, "feature rows", 1, 1 << 20),
          num_field("w", FieldType::kInt, true, "feature cols", 1, 1 << 20),
      }};
  return schema;
}

constexpr double kMaxU64 = 1.8446744073709552e19;

}  // namespace

void validate_config(const Json& config, const Schema& schema) {
  validate_node(config, schema, "");
}

std::string schema_help(const Schema& schema) {
  std::ostringstream out;
  out << "Config keys (" << schema.title << "):\n";
  append_help(out, schema, 2);
  return out.str();
}

const Schema& synth_schema() {
  static const Schema schema{
      "synth",
      {
          num_field("scenarios", FieldType::kInt, false,
                    "number of scenarios to generate", 1, 100000),
          num_field("seed", FieldType::kUint, false,
                    "base seed; scenario i uses seed + i", 0, kMaxU64),
          obj_field("spec", false, "scenario description",
                    &scenario_spec_schema()),
          field("render", FieldType::kBool, false,
                "also dump raw RGB planes and a manifest"),
      }};
  return schema;
}

const Schema& saliency_schema() {
  static const Schema schema{
      "saliency",
      {
          field("scenario", FieldType::kString, true,
                "path to a scenario JSON"),
          num_field("patch_size", FieldType::kInt, false, "patch side, pixels",
                    4, 4096),
          num_field("drop_ratio", FieldType::kDouble, false,
                    "fraction of patches to drop", 0, 1, true),
          field("mode", FieldType::kString, false,
                "\"saliency\" or \"random\""),
          num_field("seed", FieldType::kUint, false,
                    "RNG seed for random masks", 0, kMaxU64),
          num_field("drop_threshold", FieldType::kDouble, false,
                    "footprint fraction that drops a feature cell", 1e-9, 1),
          arr_field("layers", false,
                    "layer resolutions for the kept-fraction report",
                    FieldType::kObject, &saliency_layer_schema()),
      }};
  return schema;
}

const Schema& temporal_schema() {
  static const Schema schema{
      "temporal",
      {
          arr_field("scenarios", true, "paths to training scenario JSONs",
                    FieldType::kString),
          num_field("alpha", FieldType::kDouble, false,
                    "score regularizer weight", 0, 1e9),
          num_field("mu", FieldType::kDouble, false, "score anchor", 1e-9, 1,
                    true),
          num_field("learning_rate", FieldType::kDouble, false,
                    "gradient step size", 0, 1e9),
          num_field("episodes", FieldType::kInt, false, "training episodes",
                    1, 1000000),
          num_field("iou_threshold", FieldType::kDouble, false,
                    "tracker match threshold", 1e-9, 1, true),
          num_field("seed", FieldType::kUint, false, "training seed", 0,
                    kMaxU64),
      }};
  return schema;
}

const Schema& prune_schema() {
  static const Schema schema{
      "prune",
      {
          field("weights", FieldType::kString, false,
                "path to a weight archive (or give \"synth\")"),
          obj_field("synth", false, "generate a synthetic archive",
                    &prune_synth_schema()),
          num_field("ratio", FieldType::kDouble, true,
                    "target pruning ratio", 0, 1, true),
          num_field("rounds", FieldType::kInt, false,
                    "magnitude pruning rounds", 1, 1000),
          num_field("library_size", FieldType::kInt, false,
                    "pattern library size", 1, 4096),
          num_field("target_nnz", FieldType::kInt, false,
                    "kept weights per kernel", 1, 961),
          field("save_weights", FieldType::kBool, false,
                "write the synthetic archive next to the mask"),
      }};
  return schema;
}

const Schema& simulate_schema() {
  static const Schema schema{
      "simulate",
      {
          arr_field("stages", true, "pipeline stages, upstream first",
                    FieldType::kObject, &stage_schema()),
          field("overlap", FieldType::kBool, false,
                "start a stage on the first upstream tile"),
          num_field("frame_drop_ratio", FieldType::kDouble, false,
                    "fraction of frames dropped upstream", 0, 1, true),
          num_field("patch_drop_ratio", FieldType::kDouble, false,
                    "recorded patch drop ratio (costs come from the mask)",
                    0, 1, true),
          field("saliency_mask", FieldType::kString, false,
                "path to a mask file produced by the saliency command"),
          num_field("mask_frame", FieldType::kInt, false,
                    "frame index inside the mask file", 0, 1000000),
          num_field("drop_threshold", FieldType::kDouble, false,
                    "footprint fraction that drops a feature cell", 1e-9, 1),
          field("prune_mask", FieldType::kString, false,
                "path to a weight mask; entries are matched to layers by "
                "name"),
          obj_field("tile", false, "tile extents", &tile_schema()),
          num_field("calibrate_target_ms", FieldType::kDouble, false,
                    "pin the dense end-to-end latency to this anchor", 1e-9,
                    1e12),
          num_field("clock_scale", FieldType::kDouble, false,
                    "uniform clock multiplier", 1e-12, 1e12),
      }};
  return schema;
}

const Schema& report_schema() {
  static const Schema schema{
      "report",
      {
          obj_field("ours", true, "the row under evaluation",
                    &report_row_schema()),
          arr_field("baselines", true, "measured comparison rows",
                    FieldType::kObject, &report_row_schema()),
      }};
  return schema;
}

const Schema& sweep_schema() {
  static const Schema schema{
      "sweep",
      {
          field("kind", FieldType::kString, true,
                "\"spatial\" (patch masks) or \"temporal\" (frame drops)"),
          num_field("scenarios", FieldType::kInt, false,
                    "scenario count", 1, 100000),
          obj_field("spec", false, "scenario description",
                    &scenario_spec_schema()),
          num_field("seed", FieldType::kUint, false,
                    "base seed; scenario i uses seed + i", 0, kMaxU64),
          arr_field("drop_ratios", true, "swept drop ratios",
                    FieldType::kDouble, nullptr, 0, 1, true),
          num_field("iou_threshold", FieldType::kDouble, false,
                    "tracker match threshold", 1e-9, 1, true),
          num_field("patch_size", FieldType::kInt, false,
                    "patch side for spatial sweeps", 4, 4096),
          num_field("min_keep_fraction", FieldType::kDouble, false,
                    "kept-area fraction below which a detection is lost",
                    1e-9, 1),
          arr_field("modes", false,
                    "mask policies to compare (defaults per kind)",
                    FieldType::kString),
      }};
  return schema;
}

const Schema* find_schema(const std::string& command) {
  if (command == "synth") return &synth_schema();
  if (command == "saliency") return &saliency_schema();
  if (command == "temporal") return &temporal_schema();
  if (command == "prune") return &prune_schema();
  if (command == "simulate") return &simulate_schema();
  if (command == "report") return &report_schema();
  if (command == "sweep") return &sweep_schema();
  return nullptr;
}

}  // namespace trivid::cli
