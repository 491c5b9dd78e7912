/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "trivid/error.hpp"

namespace trivid::pipeline {

void StageSpec::validate() const {
  require(!name.empty(), "stage name must not be empty");
  device.validate();
  require(tiles_emitted >= 1, "tiles emitted must be >= 1");
  for (const accel::LayerSpec& layer : layers) layer.validate();
}

void SimOptions::validate() const {
  if (frame_drop_ratio < 0.0 || frame_drop_ratio >= 1.0) {
    throw ConfigError("frame drop ratio must lie in [0,1)");
  }
  if (patch_drop_ratio < 0.0 || patch_drop_ratio >= 1.0) {
    throw ConfigError("patch drop ratio must lie in [0,1)");
  }
  require(clock_scale > 0.0, "clock scale must be positive");
}

double stage_latency(
    const StageSpec& stage, const SimOptions& options,
    const std::map<std::string, spatial::FeatureMask>& feature_masks,
    const std::map<std::string, accel::LayerSparsity>& sparsity) {
  stage.validate();
  options.validate();
  accel::DeviceSpec scaled = stage.device;
  scaled.clock_hz *= options.clock_scale;
  accel::ModelCost cost = accel::model_cost(stage.layers, options.tile,
                                            scaled, feature_masks, sparsity);
  return cost.total.latency_s;
}

PipelineReport simulate_pipeline(
    const std::vector<StageSpec>& stages, const SimOptions& options,
    const std::map<std::string, spatial::FeatureMask>& feature_masks,
    const std::map<std::string, accel::LayerSparsity>& sparsity) {
  require(!stages.empty(), "pipeline needs at least one stage");
  options.validate();

  PipelineReport report;
  report.overlap = options.overlap;
  report.frame_drop_ratio = options.frame_drop_ratio;
  report.patch_drop_ratio = options.patch_drop_ratio;

  std::vector<double> latencies;
  latencies.reserve(stages.size());
  for (const StageSpec& stage : stages) {
    double l = stage_latency(stage, options, feature_masks, sparsity);
    latencies.push_back(l);
    report.stage_latency_s.emplace_back(stage.name, l);
    report.power_w += stage.device.board_power_w;
  }

  double max_latency = *std::max_element(latencies.begin(), latencies.end());
  require(max_latency > 0.0, "pipeline needs a stage with nonzero latency");

  if (options.overlap) {
    // Stage i+1 starts once stage i emits its first tile and can never
    // finish before its upstream handed over the last one.
    double start = 0.0;
    double finish = 0.0;
    for (size_t i = 0; i < stages.size(); ++i) {
      finish = std::max(finish, start + latencies[i]);
      start += latencies[i] / stages[i].tiles_emitted;
    }
    report.end_to_end_latency_s = finish;
  } else {
    double sum = 0.0;
    for (double l : latencies) sum += l;
    report.end_to_end_latency_s = sum;
  }

  report.throughput_fps = 1.0 / max_latency;
  report.efr_fps = report.throughput_fps / (1.0 - options.frame_drop_ratio);
  report.energy_per_frame_j = report.power_w / report.efr_fps;
  return report;
}

double calibrate(double target_latency_s,
                 const std::vector<StageSpec>& stages,
                 const SimOptions& options) {
  require(target_latency_s > 0.0, "calibration target must be positive");
  SimOptions dense = options;
  dense.clock_scale = 1.0;
  dense.patch_drop_ratio = 0.0;
  PipelineReport report = simulate_pipeline(stages, dense);
  return report.end_to_end_latency_s / target_latency_s;
}

namespace {

ReportRow resolve_row(const MeasuredRow& in) {
  if (in.frame_drop_ratio < 0.0 || in.frame_drop_ratio >= 1.0) {
    throw ConfigError("frame drop ratio must lie in [0,1)");
  }
  require(in.latency_ms > 0.0, "row latency must be positive");
  require(in.power_w > 0.0, "row power must be positive");
  ReportRow row;
  row.method = in.method;
  row.data_reduction = in.data_reduction;
  row.pruning = in.pruning;
  row.latency_ms = in.latency_ms;
  if (in.efr_fps.has_value()) {
    require(*in.efr_fps > 0.0, "measured EFR must be positive");
    row.efr_fps = *in.efr_fps;
    row.efr_measured = true;
  } else {
    row.efr_fps =
        (1000.0 / in.latency_ms) / (1.0 - in.frame_drop_ratio);
  }
  row.power_w = in.power_w;
  row.energy_j_per_frame = in.power_w / row.efr_fps;
  return row;
}

}  // namespace

ComparisonTable efficiency_report(const MeasuredRow& ours,
                                  const std::vector<MeasuredRow>& baselines) {
  ComparisonTable table;
  ReportRow our_row = resolve_row(ours);
  table.rows.push_back(our_row);
  for (const MeasuredRow& b : baselines) {
    ReportRow row = resolve_row(b);
    RatioRow ratio;
    ratio.baseline = row.method;
    ratio.latency_x = row.latency_ms / our_row.latency_ms;
    ratio.efr_x = our_row.efr_fps / row.efr_fps;
    ratio.power_x = row.power_w / our_row.power_w;
    ratio.energy_x = row.energy_j_per_frame / our_row.energy_j_per_frame;
    table.rows.push_back(std::move(row));
    table.ratios.push_back(std::move(ratio));
  }
  return table;
}

MeasuredRow measured_from_report(const PipelineReport& report,
                                 const std::string& method,
                                 const std::string& data_reduction,
                                 const std::string& pruning) {
  MeasuredRow row;
  row.method = method;
  row.data_reduction = data_reduction;
  row.pruning = pruning;
  row.latency_ms = 1000.0 / report.throughput_fps;
  row.frame_drop_ratio = report.frame_drop_ratio;
  row.power_w = report.power_w;
  return row;
}

StageSpec stage_from_json(const Json& j) {
  try {
    StageSpec stage;
    stage.name = j.at("name").get<std::string>();
    stage.device = accel::device_from_json(j.at("device"));
    stage.layers = accel::layer_table_from_json(j);
    stage.tiles_emitted = j.value("tiles_emitted", stage.tiles_emitted);
    stage.validate();
    return stage;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed stage JSON: ") + e.what());
  }
}

Json stage_to_json(const StageSpec& stage) {
  Json j;
  j["name"] = stage.name;
  j["device"] = accel::device_to_json(stage.device);
  j["layers"] = accel::layer_table_to_json(stage.layers)["layers"];
  j["tiles_emitted"] = stage.tiles_emitted;
  return j;
}

MeasuredRow measured_row_from_json(const Json& j) {
  try {
    MeasuredRow row;
    row.method = j.at("method").get<std::string>();
    row.data_reduction = j.value("data_reduction", row.data_reduction);
    row.pruning = j.value("pruning", row.pruning);
    row.latency_ms = j.at("latency_ms").get<double>();
    row.frame_drop_ratio = j.value("frame_drop_ratio", 0.0);
    row.power_w = j.at("power_w").get<double>();
    if (j.contains("efr_fps")) row.efr_fps = j.at("efr_fps").get<double>();
    return row;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed report row JSON: ") + e.what());
  }
}

Json measured_row_to_json(const MeasuredRow& row) {
  Json j;
  j["method"] = row.method;
  j["data_reduction"] = row.data_reduction;
  j["pruning"] = row.pruning;
  j["latency_ms"] = row.latency_ms;
  j["frame_drop_ratio"] = row.frame_drop_ratio;
  j["power_w"] = row.power_w;
  if (row.efr_fps.has_value()) j["efr_fps"] = *row.efr_fps;
  return j;
}

}  // namespace trivid::pipeline
