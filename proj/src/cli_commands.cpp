/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "trivid/accel.hpp"
#include "trivid/archive.hpp"
#include "trivid/cli.hpp"
#include "trivid/error.hpp"
#include "trivid/metrics.hpp"
#include "trivid/pipeline.hpp"
#include "trivid/pruning.hpp"
#include "trivid/rng.hpp"
#include "trivid/scenario.hpp"
#include "trivid/spatial.hpp"
#include "trivid/temporal.hpp"

namespace trivid::cli {

namespace fs = std::filesystem;

namespace {

// Computed values are printed at 3 significant digits, echoed inputs at 6.
std::string fmt_g(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

std::string g3(double v) { return fmt_g(v, 3); }
std::string g6(double v) { return fmt_g(v, 6); }

// Binary mode and explicit '\n' keep outputs byte-identical across runs.
void write_file(const fs::path& path, const std::string& content,
                const CliOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("short write: " + path.string());
  }
  out.close();
  if (!options.quiet) {
    std::cout << "wrote " << path.string() << "\n";
  }
}

void write_json(const fs::path& path, const Json& j,
                const CliOptions& options) {
  write_file(path, j.dump(2) + "\n", options);
}

fs::path prepare_out_dir(const CliOptions& options) {
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec && !fs::is_directory(options.out_dir)) {
    throw IoError("cannot create output directory: " +
                  options.out_dir.string());
  }
  return options.out_dir;
}

// Referenced data files (as opposed to the run config): absence is an I/O
// error, malformed content a format error.
Json load_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

uint64_t effective_seed(const Json& config, const CliOptions& options,
                        uint64_t fallback) {
  if (options.seed.has_value()) return *options.seed;
  return config.value("seed", fallback);
}

ScenarioSpec spec_from_config(const Json& config) {
  Json merged = scenario_spec_to_json(ScenarioSpec{});
  if (config.contains("spec")) {
    merged.update(config["spec"]);
  }
  ScenarioSpec spec = scenario_spec_from_json(merged);
  spec.validate();
  return spec;
}

ScenarioTruth load_scenario(const fs::path& path) {
  return scenario_from_json(load_json_file(path));
}

struct FrameGrids {
  std::vector<spatial::PatchGrid> grids;  // scored + smoothed per frame
};

}  // namespace

Json load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config: " + path.string());
  }
  try {
    Json config = Json::parse(in);
    if (!config.is_object()) {
      throw ConfigError("config must be a JSON object: " + path.string());
    }
    return config;
  } catch (const Json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  return 4;
}

size_t worker_count(size_t jobs) {
  size_t workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* env = std::getenv("TRIVID_THREADS")) {
    std::string text(env);
    if (text.empty() ||
        !std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
      throw ConfigError("TRIVID_THREADS must be a positive integer");
    }
    uint64_t cap = std::strtoull(text.c_str(), nullptr, 10);
    if (cap == 0) {
      throw ConfigError("TRIVID_THREADS must be a positive integer");
    }
    workers = std::min<size_t>(workers, cap);
  }
  workers = std::min(workers, std::max<size_t>(jobs, 1));
  return std::max<size_t>(workers, 1);
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  size_t workers = worker_count(n);
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mutex);
          if (!first) first = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

void cmd_synth(const Json& config, const CliOptions& options) {
  int scenarios = config.value("scenarios", 1);
  uint64_t seed = effective_seed(config, options, 1);
  bool render = config.value("render", false);
  ScenarioSpec spec = spec_from_config(config);

  fs::path out = prepare_out_dir(options);
  Json manifest_entries = Json::array();
  for (int i = 0; i < scenarios; ++i) {
    ScenarioTruth truth = synth_scenario(spec, seed + static_cast<uint64_t>(i));
    std::string stem = "scenario_" + std::to_string(i);
    write_json(out / (stem + ".json"), scenario_to_json(truth), options);
    if (render) {
      VideoSequence video = render_scenario(truth);
      std::string raw;
      for (const Frame& frame : video.frames) {
        raw.append(reinterpret_cast<const char*>(frame.data.data()),
                   frame.data.size());
      }
      write_file(out / (stem + ".rgb"), raw, options);
      Json entry;
      entry["scenario"] = stem + ".json";
      entry["frames_file"] = stem + ".rgb";
      entry["width"] = spec.width;
      entry["height"] = spec.height;
      entry["frames"] = truth.n_frames;
      entry["channels"] = Frame::kChannels;
      entry["fps"] = spec.fps;
      manifest_entries.push_back(std::move(entry));
    }
  }
  if (render) {
    Json manifest;
    manifest["scenarios"] = std::move(manifest_entries);
    write_json(out / "manifest.json", manifest, options);
  }
}

void cmd_saliency(const Json& config, const CliOptions& options) {
  ScenarioTruth truth = load_scenario(config.at("scenario").get<std::string>());
  int patch_size = config.value("patch_size", 60);
  double drop_ratio = config.value("drop_ratio", 0.2);
  std::string mode = config.value("mode", "saliency");
  uint64_t seed = effective_seed(config, options, 1);
  double drop_threshold = config.value("drop_threshold", 1.0);
  if (mode != "saliency" && mode != "random") {
    throw ConfigError("mode must be \"saliency\" or \"random\"");
  }

  std::vector<spatial::LayerDims> layers;
  if (config.contains("layers")) {
    for (const Json& item : config["layers"]) {
      spatial::LayerDims dims;
      dims.name = item.at("name").get<std::string>();
      dims.height = item.at("h").get<int>();
      dims.width = item.at("w").get<int>();
      layers.push_back(std::move(dims));
    }
  }

  VideoSequence video = render_scenario(truth);
  Rng root(seed);
  std::vector<spatial::SaliencyMask> masks;
  masks.reserve(video.frames.size());
  for (size_t f = 0; f < video.frames.size(); ++f) {
    GrayPlane gray = rgb_to_gray(video.frames[f]);
    spatial::PatchGrid grid = spatial::build_patch_grid(
        truth.spec.width, truth.spec.height, patch_size);
    if (mode == "saliency") {
      spatial::score_patches(grid, gray);
      spatial::smooth_scores(grid);
      masks.push_back(spatial::build_mask(grid, drop_ratio));
    } else {
      Rng frame_rng = root.split(f);
      masks.push_back(spatial::random_mask(grid, drop_ratio, frame_rng));
    }
  }

  fs::path out = prepare_out_dir(options);
  Json mask_doc;
  Json frames = Json::array();
  for (const spatial::SaliencyMask& mask : masks) {
    frames.push_back(spatial::saliency_mask_to_json(mask));
  }
  mask_doc["frames"] = std::move(frames);
  write_json(out / "masks.json", mask_doc, options);

  std::ostringstream csv;
  csv << "layer,kept_fraction\n";
  double patch_sum = 0.0;
  for (const spatial::SaliencyMask& mask : masks) {
    patch_sum += static_cast<double>(mask.kept_count()) / mask.patch_count();
  }
  csv << "patches," << g6(patch_sum / static_cast<double>(masks.size()))
      << "\n";
  for (const spatial::LayerDims& dims : layers) {
    double sum = 0.0;
    for (const spatial::SaliencyMask& mask : masks) {
      spatial::FeatureMask fm = spatial::interpolate_mask(
          mask, dims.height, dims.width, drop_threshold, dims.name);
      sum += fm.kept_fraction();
    }
    csv << dims.name << "," << g6(sum / static_cast<double>(masks.size()))
        << "\n";
  }
  write_file(out / "kept_fraction.csv", csv.str(), options);
}

void cmd_temporal(const Json& config, const CliOptions& options) {
  std::vector<temporal::TrainingScenario> scenarios;
  for (const Json& item : config.at("scenarios")) {
    ScenarioTruth truth = load_scenario(item.get<std::string>());
    scenarios.push_back(temporal::make_training_scenario(truth));
  }

  temporal::ObjectiveConfig cfg;
  cfg.alpha = config.value("alpha", cfg.alpha);
  cfg.mu = config.value("mu", cfg.mu);
  cfg.learning_rate = config.value("learning_rate", cfg.learning_rate);
  cfg.episodes = config.value("episodes", cfg.episodes);
  cfg.iou_threshold = config.value("iou_threshold", cfg.iou_threshold);
  cfg.seed = effective_seed(config, options, cfg.seed);

  temporal::TrainResult result = temporal::train_policy(scenarios, cfg);

  fs::path out = prepare_out_dir(options);
  write_json(out / "policy.json", temporal::policy_params_to_json(result.params),
             options);

  std::ostringstream csv;
  csv << "episode,mean_reward,mean_drop_ratio,J\n";
  for (const temporal::TraceRow& row : result.trace) {
    csv << row.episode << "," << g6(row.mean_reward) << ","
        << g6(row.mean_drop_ratio) << "," << g6(row.objective_value) << "\n";
  }
  write_file(out / "trace.csv", csv.str(), options);
}

void cmd_prune(const Json& config, const CliOptions& options) {
  bool has_weights = config.contains("weights");
  bool has_synth = config.contains("synth");
  if (has_weights == has_synth) {
    throw ConfigError("give exactly one of \"weights\" or \"synth\"");
  }

  WeightArchive archive;
  bool synthesized = false;
  if (has_weights) {
    archive = load_weight_archive(config.at("weights").get<std::string>());
  } else {
    const Json& synth = config["synth"];
    int tensors = synth.value("tensors", 4);
    int c_out = synth.value("c_out", 8);
    int c_in = synth.value("c_in", 8);
    int k = synth.value("k", 3);
    if (k % 2 == 0) {
      throw ConfigError("synth.k must be odd");
    }
    uint64_t seed =
        options.seed.value_or(synth.value("seed", uint64_t{1}));
    Rng root(seed);
    for (int t = 0; t < tensors; ++t) {
      WeightTensor tensor;
      tensor.name = "conv" + std::to_string(t);
      tensor.shape = {static_cast<uint32_t>(c_out),
                      static_cast<uint32_t>(c_in), static_cast<uint32_t>(k),
                      static_cast<uint32_t>(k)};
      Rng rng = root.split(static_cast<uint64_t>(t));
      size_t count = static_cast<size_t>(c_out) * c_in * k * k;
      tensor.values.reserve(count);
      for (size_t i = 0; i < count; ++i) {
        tensor.values.push_back(static_cast<float>(rng.normal()));
      }
      archive.tensors.push_back(std::move(tensor));
    }
    archive.validate();
    synthesized = true;
  }

  double ratio = config.at("ratio").get<double>();
  int rounds = config.value("rounds", 1);
  int library_size = config.value("library_size", 8);
  int target_nnz = config.value("target_nnz", 4);
  bool save_weights = config.value("save_weights", true);

  fs::path out = prepare_out_dir(options);
  if (synthesized && save_weights) {
    save_weight_archive(archive, out / "weights.triw");
    if (!options.quiet) {
      std::cout << "wrote " << (out / "weights.triw").string() << "\n";
    }
  }

  if (ratio == 0.0) {
    PruneMask mask = full_mask(archive);
    save_mask(mask, out / "mask.trim");
    if (!options.quiet) {
      std::cout << "wrote " << (out / "mask.trim").string() << "\n";
    }
    write_file(out / "stats.csv", "pruning_ratio,sparse_kernel_ratio\n0,0\n",
               options);
    return;
  }

  pruning::HardwareAwareResult result = pruning::hardware_aware_prune(
      archive, ratio, rounds, library_size, target_nnz);
  save_mask(result.mask, out / "mask.trim");
  if (!options.quiet) {
    std::cout << "wrote " << (out / "mask.trim").string() << "\n";
  }
  if (save_weights) {
    save_weight_archive(result.weights, out / "pruned.triw");
    if (!options.quiet) {
      std::cout << "wrote " << (out / "pruned.triw").string() << "\n";
    }
  }
  write_json(out / "library.json",
             pruning::pattern_library_to_json(result.library), options);

  std::ostringstream csv;
  csv << "pruning_ratio,sparse_kernel_ratio";
  for (size_t i = 0; i < result.stats.pattern_histogram.size(); ++i) {
    csv << ",pattern_" << i;
  }
  csv << "\n";
  csv << g6(result.stats.pruning_ratio) << ","
      << g6(result.stats.sparse_kernel_ratio);
  for (int64_t count : result.stats.pattern_histogram) {
    csv << "," << count;
  }
  csv << "\n";
  write_file(out / "stats.csv", csv.str(), options);
}

void cmd_simulate(const Json& config, const CliOptions& options) {
  std::vector<pipeline::StageSpec> stages;
  for (const Json& item : config.at("stages")) {
    bool has_table = item.contains("table");
    bool has_layers = item.contains("layers");
    if (has_table == has_layers) {
      throw ConfigError("stage \"" + item.value("name", std::string("?")) +
                        "\": give exactly one of \"table\" or \"layers\"");
    }
    if (has_layers) {
      stages.push_back(pipeline::stage_from_json(item));
    } else {
      pipeline::StageSpec stage;
      stage.name = item.at("name").get<std::string>();
      stage.device = accel::device_from_json(item.value("device", Json::object()));
      stage.layers = accel::load_layer_table(item.at("table").get<std::string>());
      stage.tiles_emitted = item.value("tiles_emitted", stage.tiles_emitted);
      stage.validate();
      stages.push_back(std::move(stage));
    }
  }

  pipeline::SimOptions sim;
  sim.overlap = config.value("overlap", true);
  sim.frame_drop_ratio = config.value("frame_drop_ratio", 0.0);
  sim.patch_drop_ratio = config.value("patch_drop_ratio", 0.0);
  if (config.contains("tile")) {
    const Json& tile = config["tile"];
    sim.tile.t_h = tile.value("t_h", sim.tile.t_h);
    sim.tile.t_w = tile.value("t_w", sim.tile.t_w);
    sim.tile.t_c = tile.value("t_c", sim.tile.t_c);
  }

  std::map<std::string, spatial::FeatureMask> feature_masks;
  if (config.contains("saliency_mask")) {
    Json doc = load_json_file(config["saliency_mask"].get<std::string>());
    if (!doc.contains("frames") || !doc["frames"].is_array() ||
        doc["frames"].empty()) {
      throw FormatError("saliency mask file has no frames");
    }
    int frame = config.value("mask_frame", 0);
    if (frame < 0 || static_cast<size_t>(frame) >= doc["frames"].size()) {
      throw ConfigError("mask_frame out of range");
    }
    double drop_threshold = config.value("drop_threshold", 1.0);
    spatial::SaliencyMask mask =
        spatial::saliency_mask_from_json(doc["frames"][frame]);
    if (!config.contains("patch_drop_ratio")) {
      sim.patch_drop_ratio =
          1.0 - static_cast<double>(mask.kept_count()) / mask.patch_count();
    }
    for (const pipeline::StageSpec& stage : stages) {
      for (const accel::LayerSpec& layer : stage.layers) {
        if (layer.kind != accel::LayerKind::kConv) continue;
        feature_masks[layer.name] = spatial::interpolate_mask(
            mask, layer.h_out, layer.w_out, drop_threshold, layer.name);
      }
    }
  }

  std::map<std::string, accel::LayerSparsity> sparsity;
  if (config.contains("prune_mask")) {
    PruneMask mask = load_mask(config["prune_mask"].get<std::string>());
    for (const MaskEntry& entry : mask.entries) {
      const accel::LayerSpec* match = nullptr;
      for (const pipeline::StageSpec& stage : stages) {
        for (const accel::LayerSpec& layer : stage.layers) {
          if (layer.kind == accel::LayerKind::kConv &&
              layer.name == entry.name) {
            match = &layer;
            break;
          }
        }
        if (match != nullptr) break;
      }
      if (match == nullptr) {
        if (!options.quiet) {
          std::cout << "note: mask entry '" << entry.name
                    << "' matches no conv layer\n";
        }
        continue;
      }
      sparsity[entry.name] = accel::sparsity_from_mask_entry(*match, entry);
    }
  }

  if (config.contains("calibrate_target_ms") && config.contains("clock_scale")) {
    throw ConfigError("give either calibrate_target_ms or clock_scale");
  }
  if (config.contains("calibrate_target_ms")) {
    double target_ms = config["calibrate_target_ms"].get<double>();
    sim.clock_scale = pipeline::calibrate(target_ms / 1000.0, stages, sim);
  } else {
    sim.clock_scale = config.value("clock_scale", 1.0);
  }

  pipeline::PipelineReport report =
      pipeline::simulate_pipeline(stages, sim, feature_masks, sparsity);

  fs::path out = prepare_out_dir(options);
  std::ostringstream csv;
  csv << "metric,value\n";
  for (const auto& [name, latency] : report.stage_latency_s) {
    csv << "stage_latency_ms:" << name << "," << g6(latency * 1000.0) << "\n";
  }
  csv << "end_to_end_latency_ms," << g6(report.end_to_end_latency_s * 1000.0)
      << "\n";
  csv << "throughput_fps," << g6(report.throughput_fps) << "\n";
  csv << "efr_fps," << g6(report.efr_fps) << "\n";
  csv << "power_w," << g6(report.power_w) << "\n";
  csv << "energy_per_frame_j," << g6(report.energy_per_frame_j) << "\n";
  csv << "frame_drop_ratio," << g6(report.frame_drop_ratio) << "\n";
  csv << "patch_drop_ratio," << g6(report.patch_drop_ratio) << "\n";
  csv << "overlap," << (report.overlap ? 1 : 0) << "\n";
  csv << "clock_scale," << g6(sim.clock_scale) << "\n";
  write_file(out / "pipeline.csv", csv.str(), options);

  std::ostringstream layers_csv;
  layers_csv << "layer,cycles,latency_ms,macs,bytes,energy_mj,tiles_skipped\n";
  uint64_t total_cycles = 0;
  uint64_t total_macs = 0;
  uint64_t total_bytes = 0;
  double total_latency = 0.0;
  double total_energy = 0.0;
  int total_skipped = 0;
  for (const pipeline::StageSpec& stage : stages) {
    accel::DeviceSpec device = stage.device;
    device.clock_hz *= sim.clock_scale;
    accel::ModelCost cost = accel::model_cost(stage.layers, sim.tile, device,
                                              feature_masks, sparsity);
    for (const accel::LayerCost& lc : cost.layers) {
      layers_csv << lc.name << "," << lc.cycles << ","
                 << g6(lc.latency_s * 1000.0) << "," << lc.macs << ","
                 << lc.dram_bytes << "," << g6(lc.energy_j * 1000.0) << ","
                 << lc.tiles_skipped << "\n";
      total_cycles += lc.cycles;
      total_macs += lc.macs;
      total_bytes += lc.dram_bytes;
      total_latency += lc.latency_s;
      total_energy += lc.energy_j;
      total_skipped += lc.tiles_skipped;
    }
  }
  layers_csv << "total," << total_cycles << "," << g6(total_latency * 1000.0)
             << "," << total_macs << "," << total_bytes << ","
             << g6(total_energy * 1000.0) << "," << total_skipped << "\n";
  write_file(out / "layers.csv", layers_csv.str(), options);
}

void cmd_report(const Json& config, const CliOptions& options) {
  pipeline::MeasuredRow ours = pipeline::measured_row_from_json(config.at("ours"));
  std::vector<pipeline::MeasuredRow> baselines;
  for (const Json& item : config.at("baselines")) {
    baselines.push_back(pipeline::measured_row_from_json(item));
  }

  pipeline::ComparisonTable table = pipeline::efficiency_report(ours, baselines);

  fs::path out = prepare_out_dir(options);
  std::ostringstream csv;
  csv << "method,data_reduction,pruning,latency_ms,efr_fps,power_w,"
         "energy_j_per_frame\n";
  for (const pipeline::ReportRow& row : table.rows) {
    csv << row.method << "," << row.data_reduction << "," << row.pruning << ","
        << g6(row.latency_ms) << ","
        << (row.efr_measured ? g6(row.efr_fps) : g3(row.efr_fps)) << ","
        << g6(row.power_w) << "," << g3(row.energy_j_per_frame) << "\n";
  }
  write_file(out / "report.csv", csv.str(), options);

  std::ostringstream ratios;
  ratios << "baseline,latency_x,efr_x,power_x,energy_x\n";
  for (const pipeline::RatioRow& row : table.ratios) {
    ratios << row.baseline << "," << g3(row.latency_x) << "," << g3(row.efr_x)
           << "," << g3(row.power_x) << "," << g3(row.energy_x) << "\n";
  }
  write_file(out / "ratios.csv", ratios.str(), options);
}

void cmd_sweep(const Json& config, const CliOptions& options) {
  std::string kind = config.at("kind").get<std::string>();
  if (kind != "spatial" && kind != "temporal") {
    throw ConfigError("kind must be \"spatial\" or \"temporal\"");
  }
  int n_scenarios = config.value("scenarios", 30);
  uint64_t seed = effective_seed(config, options, 1);
  ScenarioSpec spec = spec_from_config(config);
  std::vector<double> drop_ratios =
      config.at("drop_ratios").get<std::vector<double>>();
  if (drop_ratios.empty()) {
    throw ConfigError("drop_ratios must not be empty");
  }
  double iou_threshold = config.value("iou_threshold", 0.3);
  int patch_size = config.value("patch_size", 60);
  double min_keep_fraction = config.value("min_keep_fraction", 0.5);

  std::vector<std::string> modes;
  if (config.contains("modes")) {
    modes = config["modes"].get<std::vector<std::string>>();
  } else if (kind == "spatial") {
    modes = {"saliency", "random"};
  } else {
    modes = {"uniform", "random"};
  }
  for (const std::string& mode : modes) {
    bool ok = kind == "spatial" ? (mode == "saliency" || mode == "random")
                                : (mode == "uniform" || mode == "random");
    if (!ok) {
      throw ConfigError("mode \"" + mode + "\" is not valid for kind \"" +
                        kind + "\"");
    }
  }

  size_t n_modes = modes.size();
  size_t n_ratios = drop_ratios.size();
  size_t jobs = n_modes * static_cast<size_t>(n_scenarios);
  std::vector<metrics::MotScores> results(jobs * n_ratios);

  parallel_for(jobs, [&](size_t job) {
    size_t mi = job / static_cast<size_t>(n_scenarios);
    size_t si = job % static_cast<size_t>(n_scenarios);
    const std::string& mode = modes[mi];
    ScenarioTruth truth = synth_scenario(spec, seed + si);
    Rng root(seed + si);

    if (kind == "spatial") {
      VideoSequence video = render_scenario(truth);
      std::vector<spatial::PatchGrid> grids;
      grids.reserve(video.frames.size());
      for (const Frame& frame : video.frames) {
        spatial::PatchGrid grid =
            spatial::build_patch_grid(spec.width, spec.height, patch_size);
        if (mode == "saliency") {
          GrayPlane gray = rgb_to_gray(frame);
          spatial::score_patches(grid, gray);
          spatial::smooth_scores(grid);
        }
        grids.push_back(std::move(grid));
      }
      for (size_t ri = 0; ri < n_ratios; ++ri) {
        std::vector<spatial::SaliencyMask> masks;
        masks.reserve(grids.size());
        for (size_t f = 0; f < grids.size(); ++f) {
          if (mode == "saliency") {
            masks.push_back(spatial::build_mask(grids[f], drop_ratios[ri]));
          } else {
            Rng rng = root.split(ri).split(f);
            masks.push_back(
                spatial::random_mask(grids[f], drop_ratios[ri], rng));
          }
        }
        auto filtered = spatial::filter_detections(truth.detections, masks,
                                                   min_keep_fraction);
        auto assignment = metrics::greedy_iou_tracker(filtered, iou_threshold);
        results[job * n_ratios + ri] =
            metrics::evaluate(truth, assignment, iou_threshold);
      }
    } else {
      for (size_t ri = 0; ri < n_ratios; ++ri) {
        std::vector<uint8_t> keep;
        if (mode == "uniform") {
          keep = temporal::uniform_drop(truth.n_frames, drop_ratios[ri]);
        } else {
          Rng rng = root.split(ri);
          keep = temporal::random_drop(truth.n_frames, drop_ratios[ri], rng);
        }
        std::vector<int> frames;
        for (int f = 0; f < truth.n_frames; ++f) {
          if (keep[static_cast<size_t>(f)]) frames.push_back(f);
        }
        ScenarioTruth restricted = restrict_to_frames(truth, frames);
        auto assignment =
            metrics::greedy_iou_tracker(restricted.detections, iou_threshold);
        results[job * n_ratios + ri] =
            metrics::evaluate(restricted, assignment, iou_threshold);
      }
    }
  });

  fs::path out = prepare_out_dir(options);
  for (size_t mi = 0; mi < n_modes; ++mi) {
    std::ostringstream csv;
    csv << "scenario_id,drop_ratio,idsw,mota,idf1,fp,fn\n";
    for (size_t ri = 0; ri < n_ratios; ++ri) {
      for (size_t si = 0; si < static_cast<size_t>(n_scenarios); ++si) {
        const metrics::MotScores& s =
            results[(mi * n_scenarios + si) * n_ratios + ri];
        csv << si << "," << g6(drop_ratios[ri]) << "," << s.idsw << ","
            << g6(s.mota) << "," << g6(s.idf1) << "," << s.fp << "," << s.fn
            << "\n";
      }
    }
    write_file(out / ("evals_" + modes[mi] + ".csv"), csv.str(), options);
  }

  std::ostringstream summary;
  summary << "mode,drop_ratio,mean_idsw,mean_mota,mean_idf1\n";
  for (size_t mi = 0; mi < n_modes; ++mi) {
    for (size_t ri = 0; ri < n_ratios; ++ri) {
      double idsw = 0.0, mota = 0.0, idf1 = 0.0;
      for (size_t si = 0; si < static_cast<size_t>(n_scenarios); ++si) {
        const metrics::MotScores& s =
            results[(mi * n_scenarios + si) * n_ratios + ri];
        idsw += s.idsw;
        mota += s.mota;
        idf1 += s.idf1;
      }
      double n = static_cast<double>(n_scenarios);
      summary << modes[mi] << "," << g6(drop_ratios[ri]) << "," << g6(idsw / n)
              << "," << g6(mota / n) << "," << g6(idf1 / n) << "\n";
    }
  }
  write_file(out / "summary.csv", summary.str(), options);
}

void run_command(const std::string& command, const Json& config,
                 const CliOptions& options) {
  const Schema* schema = find_schema(command);
  if (schema == nullptr) {
    throw ContractError("unknown command: " + command);
  }
  validate_config(config, *schema);
  if (command == "synth") return cmd_synth(config, options);
  if (command == "saliency") return cmd_saliency(config, options);
  if (command == "temporal") return cmd_temporal(config, options);
  if (command == "prune") return cmd_prune(config, options);
  if (command == "simulate") return cmd_simulate(config, options);
  if (command == "report") return cmd_report(config, options);
  cmd_sweep(config, options);
}

}  // namespace trivid::cli
