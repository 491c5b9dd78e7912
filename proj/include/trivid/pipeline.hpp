/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trivid/accel.hpp"

namespace trivid::pipeline {

// One device in the chain plus the layer sublist it executes. The stages of
// a pipeline partition the model's layer table in order. tiles_emitted sets
// the granularity at which downstream stages may start early.
struct StageSpec {
  std::string name;
  accel::DeviceSpec device;
  std::vector<accel::LayerSpec> layers;
  int tiles_emitted = 16;

  void validate() const;
};

struct SimOptions {
  bool overlap = true;
  double frame_drop_ratio = 0.0;
  double patch_drop_ratio = 0.0;  // recorded, enters costs via the masks
  accel::TileSpec tile;
  double clock_scale = 1.0;  // multiplies every stage clock

  void validate() const;
};

struct PipelineReport {
  std::vector<std::pair<std::string, double>> stage_latency_s;
  double end_to_end_latency_s = 0.0;
  double throughput_fps = 0.0;  // 1 / max stage latency
  double efr_fps = 0.0;         // throughput / (1 - frame_drop_ratio)
  double power_w = 0.0;         // sum of stage board powers
  double energy_per_frame_j = 0.0;  // power / efr
  double frame_drop_ratio = 0.0;
  double patch_drop_ratio = 0.0;
  bool overlap = true;
};

// Sum of the stage's layer latencies on its device, clock-scaled.
double stage_latency(
    const StageSpec& stage, const SimOptions& options,
    const std::map<std::string, spatial::FeatureMask>& feature_masks = {},
    const std::map<std::string, accel::LayerSparsity>& sparsity = {});

// Analytical steady-state chain. With overlap on, stage i+1 starts once
// stage i emits its first tile (offset latency_i / tiles_emitted_i) and
// cannot finish before its upstream; with overlap off stages run
// back-to-back. Throughput is set by the slowest stage either way.
PipelineReport simulate_pipeline(
    const std::vector<StageSpec>& stages, const SimOptions& options,
    const std::map<std::string, spatial::FeatureMask>& feature_masks = {},
    const std::map<std::string, accel::LayerSparsity>& sparsity = {});

// Uniform clock multiplier that pins the dense end-to-end latency to a
// measured anchor; apply it via SimOptions::clock_scale.
double calibrate(double target_latency_s, const std::vector<StageSpec>& stages,
                 const SimOptions& options);

// One efficiency-table row. latency_ms and power_w are inputs; efr_fps is a
// measured override, otherwise (1000/latency_ms)/(1 - frame_drop_ratio).
// energy_j_per_frame is always power / efr.
struct MeasuredRow {
  std::string method;
  std::string data_reduction = "none";
  std::string pruning = "none";
  double latency_ms = 0.0;
  double frame_drop_ratio = 0.0;
  double power_w = 0.0;
  std::optional<double> efr_fps;
};

struct ReportRow {
  std::string method;
  std::string data_reduction;
  std::string pruning;
  double latency_ms = 0.0;
  double efr_fps = 0.0;
  double power_w = 0.0;
  double energy_j_per_frame = 0.0;
  bool latency_measured = true;  // echoed input vs computed value
  bool efr_measured = false;
};

// baseline / ours for latency, power and energy; ours / baseline for EFR.
struct RatioRow {
  std::string baseline;
  double latency_x = 0.0;
  double efr_x = 0.0;
  double power_x = 0.0;
  double energy_x = 0.0;
};

struct ComparisonTable {
  std::vector<ReportRow> rows;  // ours first, then baselines in input order
  std::vector<RatioRow> ratios;
};

ComparisonTable efficiency_report(const MeasuredRow& ours,
                                  const std::vector<MeasuredRow>& baselines);

// Row view of a simulated pipeline: latency is the steady-state per-frame
// interval (1 / throughput).
MeasuredRow measured_from_report(const PipelineReport& report,
                                 const std::string& method,
                                 const std::string& data_reduction,
                                 const std::string& pruning);

StageSpec stage_from_json(const Json& j);
Json stage_to_json(const StageSpec& stage);
MeasuredRow measured_row_from_json(const Json& j);
Json measured_row_to_json(const MeasuredRow& row);

}  // namespace trivid::pipeline
